#include <algorithm>
#include <cmath>
#include <thread>

#include "samples.hpp"

namespace plab {

using detail::identity;
using detail::matmul;
using detail::matrix_field;
using detail::matrix_samples;
using detail::scalar_field;
using detail::transpose;

JacobianAdjugate jacobian_adjugate(const MatD& m, int d) {
    JacobianAdjugate r;
    if (d == 1) {
        r.J = m[0][0];
        r.adj[0][0] = 1.0;
    } else if (d == 2) {
        r.J = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        r.adj[0][0] = m[1][1];
        r.adj[0][1] = -m[0][1];
        r.adj[1][0] = -m[1][0];
        r.adj[1][1] = m[0][0];
    } else if (d == 3) {
        // adj_{ij} = cofactor_{ji}
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                int r1 = (j + 1) % 3, r2 = (j + 2) % 3, c1 = (i + 1) % 3, c2 = (i + 2) % 3;
                r.adj[i][j] = m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
            }
        r.J = m[0][0] * r.adj[0][0] + m[0][1] * r.adj[1][0] + m[0][2] * r.adj[2][0];
    } else {
        throw std::invalid_argument("jacobian_adjugate needs d in {1, 2, 3}");
    }
    if (std::abs(r.J) < 1e-12) throw std::domain_error("singular Jacobian matrix");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r.A[i][j] = r.adj[i][j] / r.J;
    return r;
}

FlowMap flow_from_displacement(const SpectralField& disp, double t) {
    const TorusGrid& g = disp.grid();
    int d = g.dim();
    if (disp.components() != d) throw std::invalid_argument("displacement must be a d-vector field");
    FlowMap X;
    X.t = t;
    X.displacement = disp;
    X.DX = jacobian(disp);
    for (int i = 0; i < d; ++i) X.DX.coeffs(i * d + i)[0] += g.measure();
    auto m = matrix_samples(X.DX, d);
    std::vector<MatD> adj(g.size()), A(g.size());
    std::vector<double> J(g.size());
    X.min_J = INFINITY;
    for (std::size_t p = 0; p < g.size(); ++p) {
        JacobianAdjugate ja = jacobian_adjugate(m[p], d);
        if (!(ja.J > 0.0)) throw std::domain_error("flow map degenerate: J <= 0 at t = " + std::to_string(t));
        J[p] = ja.J;
        adj[p] = ja.adj;
        A[p] = ja.A;
        X.min_J = std::min(X.min_J, ja.J);
    }
    X.J = scalar_field(g, J);
    X.adj = matrix_field(g, adj, d);
    X.A = matrix_field(g, A, d);
    return X;
}

std::vector<FlowMap> flow_map_series(const std::vector<SpectralField>& v, const std::vector<double>& t,
                                     const FlowOptions& opt) {
    if (t.empty()) throw std::invalid_argument("empty time grid");
    if (v.size() != 1 && v.size() != t.size()) throw std::invalid_argument("v_series must be frozen or sampled on t_grid");
    const TorusGrid& g = v[0].grid();
    int d = g.dim();
    auto at = [&](std::size_t k) -> const SpectralField& { return v.size() == 1 ? v[0] : v[k]; };
    NormSpec spec{d / opt.p, opt.p, 1.0, std::nullopt, std::nullopt};
    std::vector<FlowMap> out;
    SpectralField disp(g, d, true);
    double gate = 0.0;
    double dv_prev = besov_norm(jacobian(at(0)), spec);
    out.push_back(flow_from_displacement(disp, t[0]));
    for (std::size_t k = 1; k < t.size(); ++k) {
        double h = t[k] - t[k - 1];
        if (!(h > 0.0)) throw std::invalid_argument("t_grid must be increasing");
        disp.axpy(0.5 * h, at(k - 1));
        disp.axpy(0.5 * h, at(k));
        double dv = besov_norm(jacobian(at(k)), spec);
        gate += 0.5 * h * (dv + dv_prev);
        dv_prev = dv;
        FlowMap X = flow_from_displacement(disp, t[k]);
        X.gate_integral = gate;
        X.gate_exceeded = gate > opt.gate;
        out.push_back(std::move(X));
    }
    return out;
}

FlowMap flow_map(const std::vector<SpectralField>& v, const std::vector<double>& t, const FlowOptions& opt) {
    return flow_map_series(v, t, opt).back();
}

SpectralField matrix_divergence(const SpectralField& F) {
    const TorusGrid& g = F.grid();
    int d = g.dim();
    if (F.components() != d * d) throw std::invalid_argument("matrix field expected");
    SpectralField out(g, d, F.is_real());
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) {
            SpectralField di = derivative(F.component(i * d + j), i);
            auto& o = out.coeffs(j);
            const auto& c = di.coeffs();
            for (std::size_t p = 0; p < o.size(); ++p) o[p] += c[p];
        }
    return out;
}

namespace {

double max_pointwise(const SpectralField& f) {
    std::vector<double> acc(f.grid().size(), 0.0);
    for (int c = 0; c < f.components(); ++c) {
        auto s = f.real_samples(c);
        for (std::size_t p = 0; p < s.size(); ++p) acc[p] += s[p] * s[p];
    }
    return std::sqrt(*std::max_element(acc.begin(), acc.end()));
}

}  // namespace

double piola_residual(const FlowMap& X) {
    double scale = max_pointwise(X.DX);
    return max_pointwise(matrix_divergence(X.adj)) / scale;
}

// ---------------------------------------------------------------- evaluation

PointEvaluator::PointEvaluator(const SpectralField& f) : grid_(f.grid()) {
    for (int c = 0; c < f.components(); ++c) c_.push_back(f.coeffs(c));
}

void PointEvaluator::eval(const Vec3& x, double* out) const {
    const int d = grid_.dim(), n = grid_.n();
    const double M = grid_.box_scale();
    std::vector<cplx> e[3];
    for (int a = 0; a < 3; ++a) {
        if (a >= d) {
            e[a].assign(1, 1.0);
            continue;
        }
        e[a].resize(n);
        for (int i = 0; i < n; ++i) e[a][i] = std::polar(1.0, grid_.axis_mode(i) * x[a] / M);
    }
    const int n1 = d > 1 ? n : 1, n2 = d > 2 ? n : 1;
    const double inv = 1.0 / grid_.measure();
    for (std::size_t c = 0; c < c_.size(); ++c) {
        const cplx* cc = c_[c].data();
        cplx acc = 0.0;
        for (int i0 = 0; i0 < n; ++i0) {
            cplx s1 = 0.0;
            for (int i1 = 0; i1 < n1; ++i1) {
                const cplx* row = cc + (static_cast<std::size_t>(i0) * n1 + i1) * n2;
                cplx s2 = 0.0;
                for (int i2 = 0; i2 < n2; ++i2) s2 += row[i2] * e[2][i2];
                s1 += s2 * e[1][i1];
            }
            acc += s1 * e[0][i0];
        }
        out[c] = (acc * inv).real();
    }
}

namespace {

template <class F>
void parallel_points(std::size_t n, int threads, F&& body) {
    int nt = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::max(1, std::min<int>(nt, static_cast<int>(n)));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> err(nt);
    for (int w = 0; w < nt; ++w)
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t p = w; p < n; p += nt) body(p);
            } catch (...) {
                err[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
}

}  // namespace

SpectralField change_coords(const SpectralField& f, const FlowMap& X, CoordDirection dir, const CoordOptions& opt) {
    const TorusGrid& g = f.grid();
    const int d = g.dim(), nc = f.components();
    if (X.displacement.grid() != g) throw std::invalid_argument("field and flow live on different grids");
    const double L = 2.0 * kPi * g.box_scale();
    PointEvaluator fe(f), de(X.displacement);
    std::vector<std::vector<double>> out(nc, std::vector<double>(g.size()));

    if (dir == CoordDirection::to_lagrangian) {
        parallel_points(g.size(), opt.threads, [&](std::size_t p) {
            Vec3 y = g.point(p);
            double u[3] = {0, 0, 0}, v[9];
            de.eval(y, u);
            Vec3 x = y;
            for (int a = 0; a < d; ++a) x[a] += u[a];
            fe.eval(x, v);
            for (int c = 0; c < nc; ++c) out[c][p] = v[c];
        });
        return SpectralField::from_real_samples(g, out);
    }

    if (X.min_J <= 0.0) throw std::domain_error("flow is not a diffeomorphism: J <= 0");
    double max_disp = 0.0;
    for (int a = 0; a < d; ++a) {
        auto s = X.displacement.real_samples(a);
        for (double v : s) max_disp = std::max(max_disp, std::abs(v));
    }
    if (max_disp >= 0.5 * L) throw std::domain_error("displacement exceeds half the box side; inverse map not trusted");

    PointEvaluator je(X.DX);
    parallel_points(g.size(), opt.threads, [&](std::size_t p) {
        Vec3 x = g.point(p);
        double u[3] = {0, 0, 0}, m[9], v[9];
        de.eval(x, u);
        Vec3 y = x;
        for (int a = 0; a < d; ++a) y[a] -= u[a];
        bool ok = false;
        for (int it = 0; it < opt.newton_max; ++it) {
            de.eval(y, u);
            double r[3] = {0, 0, 0}, rn = 0.0;
            for (int a = 0; a < d; ++a) {
                r[a] = std::remainder(y[a] + u[a] - x[a], L);
                rn = std::max(rn, std::abs(r[a]));
            }
            if (rn <= opt.newton_tol * L) {
                ok = true;
                break;
            }
            je.eval(y, m);
            MatD DX{};
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) DX[i][j] = m[i * d + j];
            JacobianAdjugate ja = jacobian_adjugate(DX, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) y[i] -= ja.A[i][j] * r[j];
        }
        if (!ok) throw std::runtime_error("Newton inversion of the flow did not converge");
        fe.eval(y, v);
        for (int c = 0; c < nc; ++c) out[c][p] = v[c];
    });
    return SpectralField::from_real_samples(g, out);
}

double lemma_div_residual(const SpectralField& f, const FlowMap& X) {
    const TorusGrid& g = f.grid();
    const int d = g.dim();
    const bool scalar = f.components() == 1;
    if (!scalar && f.components() != d) throw std::invalid_argument("lemma check needs a scalar or a d-vector field");
    SpectralField lhs = change_coords(scalar ? gradient(f) : divergence(f), X, CoordDirection::to_lagrangian);
    SpectralField fb = change_coords(f, X, CoordDirection::to_lagrangian);
    auto adj = matrix_samples(X.adj, d);
    auto J = X.J.real_samples();
    SpectralField rhs;
    if (scalar) {
        auto k = fb.real_samples();
        std::vector<MatD> F(g.size());
        for (std::size_t p = 0; p < g.size(); ++p)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) F[p][i][j] = adj[p][i][j] * k[p];
        rhs = matrix_divergence(matrix_field(g, F, d));
    } else {
        std::vector<std::vector<double>> h(d), w(d, std::vector<double>(g.size(), 0.0));
        for (int a = 0; a < d; ++a) h[a] = fb.real_samples(a);
        for (std::size_t p = 0; p < g.size(); ++p)
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) w[i][p] += adj[p][i][k] * h[k][p];
        rhs = divergence(SpectralField::from_real_samples(g, w));
    }
    std::vector<std::vector<double>> diff(rhs.components());
    for (int c = 0; c < rhs.components(); ++c) {
        auto r = rhs.real_samples(c);
        auto l = lhs.real_samples(c);
        diff[c].resize(g.size());
        for (std::size_t p = 0; p < g.size(); ++p) diff[c][p] = l[p] - r[p] / J[p];
    }
    double c1 = max_pointwise(f) + max_pointwise(scalar ? gradient(f) : jacobian(f));
    return max_pointwise(SpectralField::from_real_samples(g, diff)) / c1;
}

// ---------------------------------------------------------------- flow bounds

FlowBoundRatios flow_bound_ratios(const std::vector<SpectralField>& v, const std::vector<double>& t, double p) {
    FlowOptions fo;
    fo.p = p;
    fo.gate = INFINITY;
    auto flows = flow_map_series(v, t, fo);
    const TorusGrid& g = v[0].grid();
    const int d = g.dim();
    NormSpec spec{d / p, p, 1.0, std::nullopt, std::nullopt};
    FlowBoundRatios r;
    r.Dv_integral = flows.back().gate_integral;
    for (std::size_t k = 1; k < flows.size(); ++k) {
        const FlowMap& X = flows[k];
        double I = X.gate_integral;
        if (!(I > 0.0)) continue;
        auto adj = matrix_samples(X.adj, d);
        auto A = matrix_samples(X.A, d);
        auto J = X.J.real_samples();
        std::vector<MatD> m1(g.size()), m2(g.size()), m4(g.size());
        std::vector<double> j1(g.size()), j2(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) {
            MatD id = identity(d), P = matmul(adj[q], transpose(A[q], d), d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    m1[q][i][j] = id[i][j] - adj[q][i][j];
                    m2[q][i][j] = id[i][j] - A[q][i][j];
                    m4[q][i][j] = P[i][j] - id[i][j];
                }
            j1[q] = J[q] - 1.0;
            j2[q] = 1.0 / J[q] - 1.0;
        }
        r.U1 = std::max(r.U1, besov_norm(matrix_field(g, m1, d), spec) / I);
        r.U2 = std::max(r.U2, besov_norm(matrix_field(g, m2, d), spec) / I);
        r.U4 = std::max(r.U4, besov_norm(matrix_field(g, m4, d), spec) / I);
        r.J = std::max(r.J, besov_norm(scalar_field(g, j1), spec) / I);
        r.Jinv = std::max(r.Jinv, besov_norm(scalar_field(g, j2), spec) / I);
    }
    return r;
}

double flow_stability_ratio(const std::vector<SpectralField>& v1, const std::vector<SpectralField>& v2,
                            const std::vector<double>& t, double p) {
    if (v1.size() != v2.size()) throw std::invalid_argument("series of different lengths");
    FlowOptions fo;
    fo.p = p;
    fo.gate = INFINITY;
    auto f1 = flow_map_series(v1, t, fo);
    auto f2 = flow_map_series(v2, t, fo);
    const int d = v1[0].grid().dim();
    NormSpec spec{d / p, p, 1.0, std::nullopt, std::nullopt};
    std::vector<double> I(t.size(), 0.0);
    double prev = besov_norm(jacobian(v2[0] - v1[0]), spec);
    for (std::size_t k = 1; k < t.size(); ++k) {
        double cur = besov_norm(jacobian(v2[k] - v1[k]), spec);
        I[k] = I[k - 1] + 0.5 * (t[k] - t[k - 1]) * (cur + prev);
        prev = cur;
    }
    double best = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(I[k] > 0.0)) continue;
        best = std::max(best, besov_norm(f2[k].A - f1[k].A, spec) / I[k]);
    }
    return best;
}

}  // namespace plab
