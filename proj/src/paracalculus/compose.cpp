#include <cmath>

#include "plab/paracalculus.hpp"

namespace plab {

PointFunction identity_function() {
    return {"identity", [](double z) { return z; }, [](double) { return true; }};
}

PointFunction inertia_function() {
    return {"I", [](double z) { return z / (1.0 + z); }, [](double z) { return 1.0 + z > 0.0; }};
}

SpectralField compose(const PointFunction& F, const SpectralField& u) {
    if (u.components() != 1) throw std::invalid_argument("compose expects a scalar field");
    double f0 = F.f(0.0);
    if (std::abs(f0) > 1e-12) throw std::domain_error("compose: F(0) must vanish, F=" + F.name);
    Dealiaser de(u.grid());
    auto s = de.to_physical(u.coeffs());
    for (auto& z : s) {
        double x = z.real();
        if (F.domain && !F.domain(x)) throw std::domain_error("compose: samples leave the domain of " + F.name);
        z = F.f(x);
    }
    SpectralField out(u.grid(), 1, true);
    out.coeffs() = de.to_coeffs(s);
    return out;
}

}  // namespace plab
