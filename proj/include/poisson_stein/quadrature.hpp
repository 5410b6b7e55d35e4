#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pstein {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

// Panel edges 0, a, 2a, 4a, ... clipped to [0, length]; length itself is the last edge.
std::vector<double> graded_edges(double length, double first);

// Composite Gauss-Legendre on graded panels over [0, length].
double integrate_graded(const std::function<double(double)>& f, double length, double first, int points);

// Composite Gauss-Legendre over explicit panel edges.
double integrate_panels(const std::function<double(double)>& f, const std::vector<double>& edges, int points);

struct Stationary4DOptions {
    double first_panel = 0.25;  // width of the first graded gap panel
    double cutoff = 40.0;       // gaps beyond this contribute nothing
    int points = 6;             // Gauss points per panel (doubled while refining)
    int max_points = 24;
    double rel_tol = 1e-6;      // stop refining below this relative change
    double fail_tol = 1e-4;     // accuracy error above this relative change
    bool pair_symmetry = true;  // integrand invariant under (t1,t2) <-> (t3,t4)
};

// out[k] += value of component k at times t (t has four entries).
using Integrand4 = std::function<void(const double* t, double* out)>;

// Integral over [0,T]^4 of a translation-invariant integrand. Each of the
// 4! orderings is integrated in gap coordinates d1, d2, d3 (largest first)
// with weight (T - d1 - d2 - d3); the gaps use graded panels. With
// pair_symmetry only one ordering of each swapped pair is visited.
std::vector<double> integrate_stationary_4d(const Integrand4& f, std::size_t components, double T,
                                            const Stationary4DOptions& opt, int points);

// Same, doubling the points per panel until successive results agree to rel_tol.
std::vector<double> integrate_stationary_4d_adaptive(const Integrand4& f, std::size_t components, double T,
                                                     const Stationary4DOptions& opt);

// Integral over [0,T]^2 of phi(|t1 - t2|), i.e. 2 int_0^T (T - d) phi(d) dd.
double integrate_stationary_2d(const std::function<double(double)>& phi, double T, double first, double cutoff,
                               int points);

// Full-cube composite Gauss-Legendre over [0,T]^4 without any splitting;
// slow and only accurate to the kink resolution, used as an oracle.
std::vector<double> integrate_cube_4d(const Integrand4& f, std::size_t components, double T, int panels,
                                      int points);

}  // namespace pstein
