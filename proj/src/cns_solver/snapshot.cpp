#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "plab/cns_solver.hpp"

namespace plab {
namespace {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& bytes) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp + " for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw std::runtime_error("short write to " + tmp);
    }
    fs::rename(tmp, path);
}

void append_coeffs(std::string& buf, const SpectralField& f) {
    for (int c = 0; c < f.components(); ++c) {
        const auto& v = f.coeffs(c);
        buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(cplx));
    }
}

void read_coeffs(std::istream& in, SpectralField& f) {
    for (int c = 0; c < f.components(); ++c) {
        auto& v = f.coeffs(c);
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)));
        if (!in) throw std::runtime_error("snapshot payload is truncated");
    }
}

}  // namespace

// path.bin holds a then u (component-major, complex doubles); path.json the metadata
void save_snapshot(const std::string& path, const CnsState& s, const CnsParams& p) {
    const TorusGrid& g = s.a.grid();
    std::string buf;
    append_coeffs(buf, s.a);
    append_coeffs(buf, s.u);
    nlohmann::json meta = {
        {"format", "plab-snapshot-1"},
        {"payload", fs::path(path + ".bin").filename().string()},
        {"layout", "row-major, last axis fastest; complex128 coefficients; a then u components"},
        {"grid", {{"dim", g.dim()}, {"n", g.n()}, {"box", g.box_scale()}}},
        {"components", {{"a", s.a.components()}, {"u", s.u.components()}}},
        {"t", s.t},
        {"params",
         {{"lambda", p.lambda}, {"mu", p.mu}, {"eps", p.eps}, {"alpha", p.alpha()}, {"pressure", p.pressure.name}}}};
    write_atomic(path + ".bin", buf);
    write_atomic(path + ".json", meta.dump(2) + "\n");
}

CnsState load_snapshot(const std::string& path) {
    std::ifstream jf(path + ".json");
    if (!jf) throw std::runtime_error("missing snapshot sidecar " + path + ".json");
    nlohmann::json meta = nlohmann::json::parse(jf);
    const auto& gj = meta.at("grid");
    TorusGrid g = make_grid(gj.at("dim").get<int>(), gj.at("n").get<int>(), gj.at("box").get<double>());
    CnsState s{SpectralField(g, meta.at("components").at("a").get<int>(), true),
               SpectralField(g, meta.at("components").at("u").get<int>(), true), meta.at("t").get<double>()};
    std::ifstream bf(path + ".bin", std::ios::binary);
    if (!bf) throw std::runtime_error("missing snapshot payload " + path + ".bin");
    read_coeffs(bf, s.a);
    read_coeffs(bf, s.u);
    return s;
}

}  // namespace plab
