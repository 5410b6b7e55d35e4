#include "poisson_stein/ou.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "poisson_stein/error.hpp"

namespace pstein {

NuKind parse_nu(const std::string& s) {
    if (s == "rademacher") return NuKind::rademacher;
    if (s == "exponential") return NuKind::exponential;
    fail(errc::argument, "unknown jump law '" + s + "' (expected rademacher or exponential)");
}

const char* to_string(NuKind k) { return k == NuKind::rademacher ? "rademacher" : "exponential"; }

OUModel OUModel::make(double lambda, NuKind nu, int jump_points) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(errc::argument, "lambda must be positive");
    OUModel m;
    m.lambda = lambda;
    m.nu = nu;
    if (nu == NuKind::rademacher) {
        m.jump_grid = {{-1.0, 0.5}, {1.0, 0.5}};
        m.nu_moments = {{2, 1.0}, {3, 0.0}, {4, 1.0}, {6, 1.0}};
        m.nu_abs3 = 1.0;
        return m;
    }
    const double c = 1.0 / 2.25;
    for (int j : {2, 3, 4, 6}) {
        double f = factorial(j);
        m.nu_moments[j] = c * (f + (j % 2 == 0 ? 1.0 : -1.0) * f / std::pow(2.0, j + 1));
    }
    m.nu_abs3 = c * (6.0 + 6.0 / 16.0);
    if (jump_points < 1) fail(errc::argument, "jump_points must be positive");
    GaussRule g = gauss_legendre(jump_points);
    const std::vector<double> edges{0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};
    for (int side : {-1, 1}) {
        double rate = side > 0 ? 1.0 : 2.0;
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            double a = edges[k] / rate, b = edges[k + 1] / rate;
            for (int i = 0; i < jump_points; ++i) {
                double x = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i];
                double w = 0.5 * (b - a) * g.weights[i] * c * std::exp(-rate * x);
                m.jump_grid.push_back({side * x, w});
            }
        }
    }
    double second = 0.0;
    for (const auto& a : m.jump_grid) second += a.u * a.u * a.weight;
    for (auto& a : m.jump_grid) a.weight /= second;
    std::sort(m.jump_grid.begin(), m.jump_grid.end(), [](const JumpAtom& x, const JumpAtom& y) { return x.u < y.u; });
    return m;
}

double OUModel::moment(int j) const {
    if (auto it = nu_moments.find(j); it != nu_moments.end()) return it->second;
    double s = 0.0;
    for (const auto& a : jump_grid) s += std::pow(a.u, j) * a.weight;
    return s;
}

double ou_inner(const OUModel& model, double t1, double t2) {
    return std::exp(-model.lambda * std::abs(t1 - t2));
}

double ou_quad_inner(const OUModel& model, double t1, double t2, double t3, double t4) {
    double mn = std::min(std::min(t1, t2), std::min(t3, t4));
    double ex = (t1 - mn) + (t2 - mn) + (t3 - mn) + (t4 - mn);
    return model.moment(4) * model.lambda * std::exp(-model.lambda * ex);
}

double ou_cubic_inner(const OUModel& model, double t1, double t2) {
    const double l = model.lambda;
    double mn = std::min(t1, t2);
    return model.moment(3) * std::pow(2.0 * l, 1.5) * std::exp(-l * (2.0 * (t1 - mn) + (t2 - mn))) / (3.0 * l);
}

double tensor_ou_c(const OUModel& model, int q) { return 2.0 * factorial(q - 1) / model.lambda; }

double tensor_ou_variance(const OUModel& model, int q, double T) {
    if (q < 2) fail(errc::argument, "tensor powers need q >= 2");
    if (!(T > 0.0)) fail(errc::argument, "time horizon must be positive");
    const double a = q * model.lambda * T;
    return 1.0 - (-std::expm1(-a)) / a;
}

double tensor_ou_variance_quadrature(const OUModel& model, int q, double T, int points) {
    if (q < 2) fail(errc::argument, "tensor powers need q >= 2");
    const double l = model.lambda;
    double I = integrate_stationary_2d([&](double d) { return std::exp(-q * l * d); }, T, 0.25 / (q * l), 60.0 / l,
                                       points);
    return factorial(q) / (tensor_ou_c(model, q) * T) * I;
}

Stationary4DOptions ou_quadrature_options(const OUModel& model, int q) {
    Stationary4DOptions opt;
    opt.first_panel = 0.25 / (std::max(q, 1) * model.lambda);
    opt.cutoff = 40.0 / model.lambda;
    return opt;
}

namespace {

std::vector<std::pair<int, int>> contraction_pairs(int q) {
    std::vector<std::pair<int, int>> out;
    for (int r = 1; r <= q; ++r)
        for (int l = 1; l <= std::min(r, q - 1); ++l) out.emplace_back(r, l);
    return out;
}

// Panel geometry left at the generic defaults is rescaled to the decay rates of the model.
Stationary4DOptions scaled_options(const Stationary4DOptions& opt, const OUModel& model, int q) {
    Stationary4DOptions o = opt;
    const Stationary4DOptions generic;
    if (o.first_panel == generic.first_panel && o.cutoff == generic.cutoff) {
        Stationary4DOptions m = ou_quadrature_options(model, q);
        o.first_panel = m.first_panel;
        o.cutoff = m.cutoff;
    }
    return o;
}

double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

}  // namespace

TensorNorms tensor_ou_contraction_norms(const OUModel& model, int q, double T, const Stationary4DOptions& opt) {
    if (q < 2) fail(errc::argument, "tensor powers need q >= 2");
    if (!(T > 0.0)) fail(errc::argument, "time horizon must be positive");
    const auto pairs = contraction_pairs(q);
    const double l = model.lambda;
    const double nu4 = model.moment(4);
    Integrand4 f = [&](const double* t, double* out) {
        double p12 = std::exp(-l * std::abs(t[0] - t[1]));
        double p13 = std::exp(-l * std::abs(t[0] - t[2]));
        double p24 = std::exp(-l * std::abs(t[1] - t[3]));
        double p34 = std::exp(-l * std::abs(t[2] - t[3]));
        double mn = std::min(std::min(t[0], t[1]), std::min(t[2], t[3]));
        double quad = nu4 * l * std::exp(-l * (t[0] + t[1] + t[2] + t[3] - 4.0 * mn));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            auto [r, ll] = pairs[k];
            out[k] = ipow(quad, r - ll) * ipow(p13 * p24, q - r) * ipow(p12 * p34, ll);
        }
        out[pairs.size()] = ipow(quad, q);
    };
    auto I = integrate_stationary_4d_adaptive(f, pairs.size() + 1, T, scaled_options(opt, model, q));
    const double cT = tensor_ou_c(model, q) * T;
    TensorNorms n;
    for (std::size_t k = 0; k < pairs.size(); ++k) n.contraction[pairs[k]] = std::sqrt(std::max(I[k], 0.0)) / cT;
    n.l4_mass = I[pairs.size()] / (cT * cT);
    n.variance = tensor_ou_variance(model, q, T);
    return n;
}

BoundReport tensor_ou_bound(const OUModel& model, int q, double T, const Stationary4DOptions& opt) {
    TensorNorms n = tensor_ou_contraction_norms(model, q, T, opt);
    const double norm_sq = n.variance / factorial(q);
    const double multiplier = q * q * std::sqrt(factorial(q - 1) * norm_sq);
    BoundReport r;
    r.add_item("tensorOU.var_defect", std::abs(1.0 - n.variance));
    for (auto [key, coef] : estimate_chain_coefficients(q, multiplier)) {
        double norm = key.second == 0 ? std::sqrt(n.l4_mass) : n.contraction.at(key);
        std::string label = key.second == 0 ? std::string("tensorOU.l4")
                                            : "tensorOU.star" + std::to_string(key.first) + std::to_string(key.second);
        r.add_item(label, coef * norm);
    }
    for (auto [key, v] : n.contraction)
        r.add_diagnostic("norm.star" + std::to_string(key.first) + std::to_string(key.second), v);
    r.add_diagnostic("norm.l4_mass", n.l4_mass);
    r.add_diagnostic("variance", n.variance);
    r.inputs_digest = "ou-tensor";
    r.finalize();
    return r;
}

double quadratic_normalization(const OUModel& model, QuadraticNormalization n) {
    double nu4 = model.moment(4);
    return n == QuadraticNormalization::variance_matched ? std::sqrt(2.0 / model.lambda + nu4)
                                                         : std::sqrt(1.0 / model.lambda + nu4);
}

namespace {

// int int_{[0,T]^2} e^{-k |a - b|}
double exp_square(double k, double T) { return 2.0 * T / k + 2.0 * std::expm1(-k * T) / (k * k); }

}  // namespace

SinglePlusDoubleNorms ou_quadratic_norms(const OUModel& model, double T, QuadraticNormalization norm,
                                         const Stationary4DOptions& opt_in) {
    if (!(T > 0.0)) fail(errc::argument, "time horizon must be positive");
    const double l = model.lambda;
    const double sigma = quadratic_normalization(model, norm);
    const double s2 = 1.0 / (sigma * sigma * T);
    const double s = std::sqrt(s2);
    const double nu3 = model.moment(3), nu4 = model.moment(4), nu6 = model.moment(6);

    SinglePlusDoubleNorms n;
    const double J = exp_square(2.0 * l, T);
    n.g_sq = s2 * nu4 * l * J;
    n.h_sq = s2 * J;
    const double e2 = -std::expm1(-2.0 * l * T);
    const double e4 = -std::expm1(-4.0 * l * T);
    const double e6 = -std::expm1(-6.0 * l * T);
    const double cube = e2 * e2 * e2 / (6.0 * l) + T - 3.0 * e2 / (2.0 * l) + 3.0 * e4 / (4.0 * l) - e6 / (6.0 * l);
    n.g_cubic = nu6 * s2 * s * cube;

    Stationary4DOptions opt = scaled_options(opt_in, model, 2);
    const bool with_cross = nu3 != 0.0;
    Integrand4 f = [&](const double* t, double* out) {
        double p12 = std::exp(-l * std::abs(t[0] - t[1]));
        double p13 = std::exp(-l * std::abs(t[0] - t[2]));
        double p24 = std::exp(-l * std::abs(t[1] - t[3]));
        double p34 = std::exp(-l * std::abs(t[2] - t[3]));
        double mn = std::min(std::min(t[0], t[1]), std::min(t[2], t[3]));
        double quad = nu4 * l * std::exp(-l * (t[0] + t[1] + t[2] + t[3] - 4.0 * mn));
        out[0] = quad * quad;
        out[1] = quad * p12 * p34;
        out[2] = p13 * p24 * p12 * p34;
        out[3] = with_cross ? ou_cubic_inner(model, t[0], t[1]) * ou_cubic_inner(model, t[2], t[3]) * p24 : 0.0;
    };
    auto I = integrate_stationary_4d_adaptive(f, 4, T, opt);
    n.h_l4_sq = s2 * std::sqrt(std::max(I[0], 0.0));
    n.h21 = s2 * std::sqrt(std::max(I[1], 0.0));
    n.h11 = s2 * std::sqrt(std::max(I[2], 0.0));
    n.gh11 = s2 * std::sqrt(std::max(I[3], 0.0));
    return n;
}

namespace {

void add_quadratic_items(BoundReport& r, const SinglePlusDoubleNorms& n) {
    r.add_diagnostic("OUquad.a", std::abs(1.0 - n.g_sq - 2.0 * n.h_sq));
    r.add_diagnostic("OUquad.b", n.g_cubic);
    r.add_diagnostic("OUquad.c", n.h_l4_sq);
    r.add_diagnostic("OUquad.d", n.h21);
    r.add_diagnostic("OUquad.e", n.h11);
    r.add_diagnostic("OUquad.f", n.gh11);
}

}  // namespace

BoundReport ou_quadratic_bound(const OUModel& model, double T, QuadraticNormalization norm,
                               const Stationary4DOptions& opt) {
    SinglePlusDoubleNorms n = ou_quadratic_norms(model, T, norm, opt);
    BoundReport r = assemble_single_plus_double(n);
    add_quadratic_items(r, n);
    r.add_diagnostic("OUquad.normalization", quadratic_normalization(model, norm));
    r.add_diagnostic("OUquad.variance", n.g_sq + 2.0 * n.h_sq);
    r.inputs_digest = "ou-quadratic";
    r.finalize();
    return r;
}

double ou_linear_kernel(const OUModel& model, double T, double u, double x) {
    if (x > T) return 0.0;
    const double l = model.lambda;
    // e^{lambda x}(e^{-lambda max(x,0)} - e^{-lambda T})
    double bracket = x <= 0.0 ? std::exp(l * x) * (-std::expm1(-l * T)) : -std::expm1(-l * (T - x));
    return u * bracket / std::sqrt(T);
}

double ou_linear_kernel_numeric(const OUModel& model, double T, double u, double x) {
    if (x > T) return 0.0;
    const double l = model.lambda;
    const double start = std::max(x, 0.0);
    double I = integrate_graded([&](double s) { return std::exp(-l * (s + start - x)); }, T - start, 0.25 / l, 16);
    return u * std::sqrt(2.0 * l / (2.0 * T / l)) * I;
}

double ou_linear_variance_defect(const OUModel& model, double T) {
    const double a = model.lambda * T;
    return -std::expm1(-a) / a;
}

double ou_linear_cubic_mass(const OUModel& model, double T) {
    const double l = model.lambda;
    const double e1 = -std::expm1(-l * T), e2 = -std::expm1(-2.0 * l * T), e3 = -std::expm1(-3.0 * l * T);
    double bracket = e1 * e1 * e1 / (3.0 * l) + T - 3.0 * e1 / l + 3.0 * e2 / (2.0 * l) - e3 / (3.0 * l);
    return model.nu_abs3 * bracket / (T * std::sqrt(T));
}

BoundReport ou_linear_bound(const OUModel& model, double T) {
    if (!(T > 0.0)) fail(errc::argument, "time horizon must be positive");
    BoundReport r;
    double defect = ou_linear_variance_defect(model, T);
    r.add_item("1stChUB.var_defect", defect);
    r.add_item("1stChUB.cubic", ou_linear_cubic_mass(model, T));
    r.add_diagnostic("OUlin.norm_sq", 1.0 - defect);
    r.inputs_digest = "ou-linear";
    r.finalize();
    return r;
}

OUDiscretization ou_discretize(const OUModel& model, double T, const OUGrid& grid) {
    if (!(T > 0.0)) fail(errc::argument, "time horizon must be positive");
    if (!(grid.h > 0.0) || !(grid.x0 > 0.0)) fail(errc::argument, "grid width and truncation must be positive");
    OUDiscretization d;
    const double X0 = grid.x0 / model.lambda;
    auto n_neg = static_cast<std::size_t>(std::ceil(X0 / grid.h - 1e-9));
    auto n_pos = static_cast<std::size_t>(std::max(1.0, std::ceil(T / grid.h - 1e-9)));
    for (std::size_t k = 0; k < n_neg; ++k) d.x_edges.push_back(-X0 + X0 * k / n_neg);
    for (std::size_t k = 0; k <= n_pos; ++k) d.x_edges.push_back(T * k / n_pos);
    d.n_x = d.x_edges.size() - 1;
    d.n_u = model.jump_grid.size();
    std::vector<double> w;
    std::vector<std::vector<double>> labels;
    for (const auto& atom : model.jump_grid)
        for (std::size_t k = 0; k < d.n_x; ++k) {
            w.push_back(atom.weight * (d.x_edges[k + 1] - d.x_edges[k]));
            labels.push_back({atom.u, 0.5 * (d.x_edges[k] + d.x_edges[k + 1])});
        }
    d.space = std::make_shared<const DiscreteSpace>(std::move(w), std::move(labels), true);
    return d;
}

namespace {

struct TimeNodes {
    std::vector<double> t, w;
};

TimeNodes time_nodes(const OUDiscretization& d, int points) {
    GaussRule g = gauss_legendre(points);
    TimeNodes n;
    for (std::size_t k = 0; k + 1 < d.x_edges.size(); ++k) {
        double a = d.x_edges[k], b = d.x_edges[k + 1];
        if (b <= 0.0) continue;
        a = std::max(a, 0.0);
        for (int i = 0; i < points; ++i) {
            n.t.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i]);
            n.w.push_back(0.5 * (b - a) * g.weights[i]);
        }
    }
    return n;
}

// Cell average over [lo, hi] of x -> e^{-rate (t - x)} 1{x <= t}.
double avg_exp(double rate, double t, double lo, double hi) {
    if (t <= lo) return 0.0;
    double top = std::min(t, hi);
    return (std::exp(-rate * (t - top)) - std::exp(-rate * (t - lo))) / (rate * (hi - lo));
}

// A[k * N + n] = avg_exp(rate, t_n, cell k)
std::vector<double> time_table(const OUDiscretization& d, const TimeNodes& tn, double rate) {
    const std::size_t N = tn.t.size();
    std::vector<double> A(d.n_x * N);
    for (std::size_t k = 0; k < d.n_x; ++k)
        for (std::size_t n = 0; n < N; ++n) A[k * N + n] = avg_exp(rate, tn.t[n], d.x_edges[k], d.x_edges[k + 1]);
    return A;
}

// X[k_1..k_q] = sum_n w_n prod_i A[k_i][n]
std::vector<double> time_tensor(const std::vector<double>& A, const TimeNodes& tn, std::size_t n_x, int q) {
    const std::size_t N = tn.t.size();
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) total *= n_x;
    std::vector<double> X(total, 0.0);
    std::vector<double> prod(N);
    std::vector<std::size_t> idx(q, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (std::size_t n = 0; n < N; ++n) prod[n] = tn.w[n];
        for (int i = 0; i < q; ++i) {
            const double* row = &A[idx[i] * N];
            for (std::size_t n = 0; n < N; ++n) prod[n] *= row[n];
        }
        double s = 0.0;
        for (std::size_t n = 0; n < N; ++n) s += prod[n];
        X[flat] = s;
        for (int i = q; i-- > 0;) {
            if (++idx[i] < n_x) break;
            idx[i] = 0;
        }
    }
    return X;
}

std::size_t cell_index(const OUDiscretization& d, std::size_t j, std::size_t k) { return j * d.n_x + k; }

}  // namespace

Kernel ou_tensor_kernel(const OUModel& model, const OUDiscretization& d, int q, double T, const OUGrid& grid) {
    if (q < 1) fail(errc::argument, "tensor order must be positive");
    const double l = model.lambda;
    TimeNodes tn = time_nodes(d, grid.time_points);
    auto A = time_table(d, tn, l);
    auto X = time_tensor(A, tn, d.n_x, q);
    const double scale = std::pow(2.0 * l, 0.5 * q) / std::sqrt(tensor_ou_c(model, q) * T);
    const std::size_t m = d.space->size();
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) total *= m;
    std::vector<double> v(total);
    std::vector<std::size_t> idx(q, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double u = 1.0;
        std::size_t xflat = 0;
        for (int i = 0; i < q; ++i) {
            std::size_t j = idx[i] / d.n_x, k = idx[i] % d.n_x;
            u *= model.jump_grid[j].u;
            xflat = xflat * d.n_x + k;
        }
        v[flat] = scale * u * X[xflat];
        for (int i = q; i-- > 0;) {
            if (++idx[i] < m) break;
            idx[i] = 0;
        }
    }
    return Kernel(d.space, q, std::move(v));
}

std::pair<Kernel, Kernel> ou_quadratic_kernels(const OUModel& model, const OUDiscretization& d, double T,
                                               QuadraticNormalization n, const OUGrid& grid) {
    const double l = model.lambda;
    const double s = 1.0 / (quadratic_normalization(model, n) * std::sqrt(T));
    TimeNodes tn = time_nodes(d, grid.time_points);
    auto A = time_table(d, tn, l);
    auto B = time_table(d, tn, 2.0 * l);
    auto X1 = time_tensor(B, tn, d.n_x, 1);
    auto X2 = time_tensor(A, tn, d.n_x, 2);
    const std::size_t m = d.space->size();
    std::vector<double> g(m), h(m * m);
    for (std::size_t j = 0; j < d.n_u; ++j)
        for (std::size_t k = 0; k < d.n_x; ++k) {
            double u = model.jump_grid[j].u;
            g[cell_index(d, j, k)] = s * 2.0 * l * u * u * X1[k];
        }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            double ua = model.jump_grid[a / d.n_x].u, ub = model.jump_grid[b / d.n_x].u;
            h[a * m + b] = s * 2.0 * l * ua * ub * X2[(a % d.n_x) * d.n_x + (b % d.n_x)];
        }
    return {Kernel(d.space, 1, std::move(g)), Kernel(d.space, 2, std::move(h))};
}

Kernel ou_linear_kernel_cells(const OUModel& model, const OUDiscretization& d, double T, const OUGrid& grid) {
    const double l = model.lambda;
    TimeNodes tn = time_nodes(d, grid.time_points);
    auto A = time_table(d, tn, l);
    auto X = time_tensor(A, tn, d.n_x, 1);
    std::vector<double> v(d.space->size());
    for (std::size_t j = 0; j < d.n_u; ++j)
        for (std::size_t k = 0; k < d.n_x; ++k)
            v[cell_index(d, j, k)] = model.jump_grid[j].u * (l / std::sqrt(T)) * X[k];
    return Kernel(d.space, 1, std::move(v));
}

BoundReport ou_quadratic_bound_discretized(const OUModel& model, double T, const OUGrid& grid,
                                           QuadraticNormalization n) {
    OUDiscretization d = ou_discretize(model, T, grid);
    auto [g, h] = ou_quadratic_kernels(model, d, T, n, grid);
    SinglePlusDoubleNorms norms = single_plus_double_norms(g, h);
    // Measured against the exact finite-T variance; 1 - Var itself is item (a) and is O(1/T).
    const double sigma = quadratic_normalization(model, n);
    const double exact = exp_square(2.0 * model.lambda, T) * (model.moment(4) * model.lambda + 2.0) / (sigma * sigma * T);
    double defect = std::abs(exact - norms.g_sq - 2.0 * norms.h_sq);
    if (defect > 0.05)
        fail(errc::resolution, "x-grid too coarse: variance defect " + std::to_string(defect) + " exceeds 0.05");
    BoundReport r = assemble_single_plus_double(norms);
    add_quadratic_items(r, norms);
    r.inputs_digest = kernel_digest({&g, &h});
    return r;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4) fail(errc::argument, "rate fit needs at least four points");
    RateFit f;
    for (auto [T, b] : points) {
        if (!(T > 0.0) || !(b > 0.0)) fail(errc::domain, "rate fit needs positive T and bound values");
        f.log_T.push_back(std::log(T));
        f.log_bound.push_back(std::log(b));
    }
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        mx += f.log_T[i];
        my += f.log_bound[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        double dx = f.log_T[i] - mx, dy = f.log_bound[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) fail(errc::domain, "rate fit needs distinct T values");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

double effective_constant(const std::vector<std::pair<double, double>>& points) {
    double sup = 0.0;
    for (auto [T, b] : points) sup = std::max(sup, b * std::sqrt(T));
    return sup;
}

}  // namespace pstein
