#include "plab/spectral_core.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace plab {
namespace {

// FFTW planning is not thread safe; execution of an existing plan on new
// arrays is. Plans are created once per shape and kept for the process.
class PlanCache {
public:
    fftw_plan get(int dim, int n, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(dim, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        int dims[3] = {n, n, n};
        std::size_t total = 1;
        for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
        auto* in = fftw_alloc_complex(total);
        auto* out = fftw_alloc_complex(total);
        fftw_plan p = fftw_plan_dft(dim, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        if (!p) throw std::runtime_error("fftw planning failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

}  // namespace

void fft_nd(int dim, int n, const cplx* in, cplx* out, Direction dir) {
    int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan p = cache().get(dim, n, sign);
    // out-of-place plan: the input buffer is never written
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

std::vector<cplx> transform(const TorusGrid& grid, const std::vector<cplx>& data, Direction dir) {
    if (data.size() != grid.size())
        throw std::invalid_argument("transform: data size does not match grid");
    std::vector<cplx> out(data.size());
    fft_nd(grid.dim(), grid.n(), data.data(), out.data(), dir);
    double scale = dir == Direction::forward ? grid.cell_volume() : 1.0 / grid.measure();
    for (auto& z : out) z *= scale;
    return out;
}

}  // namespace plab
