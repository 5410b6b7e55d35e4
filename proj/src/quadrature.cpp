#include "poisson_stein/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "poisson_stein/error.hpp"

namespace pstein {

GaussRule gauss_legendre(int n) {
    if (n < 1) fail(errc::argument, "Gauss-Legendre rule needs n >= 1");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    cache.emplace(n, rule);
    return rule;
}

std::vector<double> graded_edges(double length, double first) {
    std::vector<double> e{0.0};
    if (!(length > 0.0)) return e;
    double x = first;
    while (x < length) {
        e.push_back(x);
        x *= 2.0;
    }
    e.push_back(length);
    return e;
}

double integrate_panels(const std::function<double(double)>& f, const std::vector<double>& edges, int points) {
    GaussRule g = gauss_legendre(points);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double a = edges[k], b = edges[k + 1];
        double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double s = 0.0;
        for (int i = 0; i < points; ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
        total += half * s;
    }
    return total;
}

double integrate_graded(const std::function<double(double)>& f, double length, double first, int points) {
    return integrate_panels(f, graded_edges(length, first), points);
}

namespace {

struct Nodes {
    std::vector<double> x, w;
};

Nodes graded_nodes(double length, double first, const GaussRule& g) {
    Nodes n;
    auto edges = graded_edges(length, first);
    const std::size_t p = g.nodes.size();
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        double a = edges[k], b = edges[k + 1];
        double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < p; ++i) {
            n.x.push_back(mid + half * g.nodes[i]);
            n.w.push_back(half * g.weights[i]);
        }
    }
    return n;
}

}  // namespace

std::vector<double> integrate_stationary_4d(const Integrand4& f, std::size_t components, double T,
                                            const Stationary4DOptions& opt, int points) {
    if (!(T > 0.0)) fail(errc::argument, "time horizon must be positive");
    GaussRule g = gauss_legendre(points);
    std::array<int, 4> perm{0, 1, 2, 3};
    std::vector<std::array<int, 4>> orders;
    do {
        if (opt.pair_symmetry) {
            std::array<int, 4> swapped;
            for (int i = 0; i < 4; ++i) swapped[i] = (perm[i] + 2) % 4;
            if (!(perm < swapped)) continue;
        }
        orders.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<double> total(components, 0.0), val(components);
    Nodes n1 = graded_nodes(std::min(T, opt.cutoff), opt.first_panel, g);
    double t[4];
    for (const auto& ord : orders) {
        std::vector<double> part(components, 0.0);
        for (std::size_t i1 = 0; i1 < n1.x.size(); ++i1) {
            double d1 = n1.x[i1];
            Nodes n2 = graded_nodes(std::min(T - d1, opt.cutoff), opt.first_panel, g);
            for (std::size_t i2 = 0; i2 < n2.x.size(); ++i2) {
                double d2 = n2.x[i2];
                Nodes n3 = graded_nodes(std::min(T - d1 - d2, opt.cutoff), opt.first_panel, g);
                for (std::size_t i3 = 0; i3 < n3.x.size(); ++i3) {
                    double d3 = n3.x[i3];
                    t[ord[3]] = 0.0;
                    t[ord[2]] = d3;
                    t[ord[1]] = d3 + d2;
                    t[ord[0]] = d3 + d2 + d1;
                    std::fill(val.begin(), val.end(), 0.0);
                    f(t, val.data());
                    double w = n1.w[i1] * n2.w[i2] * n3.w[i3] * (T - d1 - d2 - d3);
                    for (std::size_t k = 0; k < components; ++k) part[k] += w * val[k];
                }
            }
        }
        for (std::size_t k = 0; k < components; ++k) total[k] += part[k];
    }
    if (opt.pair_symmetry)
        for (double& v : total) v *= 2.0;
    return total;
}

std::vector<double> integrate_stationary_4d_adaptive(const Integrand4& f, std::size_t components, double T,
                                                     const Stationary4DOptions& opt) {
    int p = opt.points;
    std::vector<double> prev = integrate_stationary_4d(f, components, T, opt, p);
    double change = 0.0;
    while (p * 2 <= opt.max_points) {
        p *= 2;
        std::vector<double> cur = integrate_stationary_4d(f, components, T, opt, p);
        change = 0.0;
        for (std::size_t k = 0; k < components; ++k) {
            double scale = std::max(std::abs(cur[k]), 1e-300);
            if (std::abs(cur[k]) < 1e-280 && std::abs(prev[k]) < 1e-280) continue;
            change = std::max(change, std::abs(cur[k] - prev[k]) / scale);
        }
        prev = std::move(cur);
        if (change < opt.rel_tol) return prev;
    }
    if (change > opt.fail_tol)
        fail(errc::accuracy, "4-D quadrature did not converge (relative change " + std::to_string(change) + ")");
    return prev;
}

double integrate_stationary_2d(const std::function<double(double)>& phi, double T, double first, double cutoff,
                               int points) {
    return 2.0 * integrate_graded([&](double d) { return (T - d) * phi(d); }, std::min(T, cutoff), first, points);
}

std::vector<double> integrate_cube_4d(const Integrand4& f, std::size_t components, double T, int panels,
                                      int points) {
    GaussRule g = gauss_legendre(points);
    std::vector<double> x, w;
    for (int k = 0; k < panels; ++k) {
        double a = T * k / panels, b = T * (k + 1) / panels;
        for (int i = 0; i < points; ++i) {
            x.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i]);
            w.push_back(0.5 * (b - a) * g.weights[i]);
        }
    }
    std::vector<double> total(components, 0.0), val(components);
    double t[4];
    const std::size_t n = x.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                for (std::size_t d = 0; d < n; ++d) {
                    t[0] = x[a];
                    t[1] = x[b];
                    t[2] = x[c];
                    t[3] = x[d];
                    std::fill(val.begin(), val.end(), 0.0);
                    f(t, val.data());
                    double ww = w[a] * w[b] * w[c] * w[d];
                    for (std::size_t k = 0; k < components; ++k) total[k] += ww * val[k];
                }
    return total;
}

}  // namespace pstein
