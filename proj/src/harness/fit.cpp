#include <cmath>

#include "plab/harness.hpp"

namespace plab {

SlopeFit fit_decay_slope(const std::vector<double>& t, const std::vector<double>& values, double lo, double hi) {
    if (t.size() != values.size()) throw std::invalid_argument("times and values differ in length");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        if (!(values[i] > 0.0) || !(t[i] > 0.0)) throw std::domain_error("log-log fit needs positive times and values");
        x.push_back(std::log(t[i]));
        y.push_back(std::log(values[i]));
    }
    if (x.size() < 8) throw std::domain_error("fit window holds " + std::to_string(x.size()) + " points, need 8");
    double n = static_cast<double>(x.size()), mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.points = static_cast<int>(x.size());
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
    return f;
}

TransitionReport detect_transition(const std::vector<double>& t, const std::vector<double>& v, double window_slope,
                                   double t_from, double box_scale, double nu, double drop) {
    TransitionReport r;
    // lowest mode rho = 1/M: Re lambda = -nu rho^2 / 2 for the acoustic pair
    double rho = 1.0 / box_scale;
    r.predicted_gap_rate = 0.5 * nu * rho * rho;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        if (t[i] < t_from || !(v[i - 1] > 0.0) || !(v[i + 1] > 0.0) || !(t[i - 1] > 0.0)) continue;
        double s = (std::log(v[i + 1]) - std::log(v[i - 1])) / (std::log(t[i + 1]) - std::log(t[i - 1]));
        if (s < window_slope - drop) {
            r.detected = true;
            r.t_transition = t[i];
            r.local_slope = s;
            break;
        }
    }
    return r;
}

}  // namespace plab
