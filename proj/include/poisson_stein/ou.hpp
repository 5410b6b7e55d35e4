#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "poisson_stein/kernel.hpp"
#include "poisson_stein/quadrature.hpp"
#include "poisson_stein/stein_bounds.hpp"

namespace pstein {

// Jump measure nu. rademacher: (delta_{-1} + delta_{+1}) / 2.
// exponential: two-sided with rate 1 on u > 0 and rate 2 on u < 0,
// c (e^{-u} 1{u>0} + e^{2u} 1{u<0}) du with c fixed by int u^2 dnu = 1; the
// asymmetry makes int u^3 dnu nonzero.
enum class NuKind { rademacher, exponential };
NuKind parse_nu(const std::string& s);
const char* to_string(NuKind k);

struct JumpAtom {
    double u = 0.0;
    double weight = 0.0;
};

struct OUModel {
    double lambda = 1.0;
    NuKind nu = NuKind::rademacher;
    std::map<int, double> nu_moments;  // j -> int u^j dnu for j in {2,3,4,6}
    double nu_abs3 = 1.0;              // int |u|^3 dnu
    std::vector<JumpAtom> jump_grid;   // u-axis discretization, int u^2 = 1 exactly

    // jump_points: Gauss points per graded u-panel for the exponential law.
    static OUModel make(double lambda, NuKind nu, int jump_points = 8);
    double moment(int j) const;
};

// <f_{t1}, f_{t2}> = e^{-lambda |t1 - t2|}
double ou_inner(const OUModel& model, double t1, double t2);
// <f_{t1} f_{t2}, f_{t3} f_{t4}> = nu_4 lambda e^{-lambda (sum t - 4 min t)}
double ou_quad_inner(const OUModel& model, double t1, double t2, double t3, double t4);
// <f_{t1}^2, f_{t2}> = nu_3 (2 lambda)^{3/2} e^{-lambda (2 t1 + t2 - 3 min)} / (3 lambda)
double ou_cubic_inner(const OUModel& model, double t1, double t2);

// ---- tensor powers, M_T(q) = I_q(F_T), F_T = (cT)^{-1/2} int_0^T f_t^{(x)q} dt, c = 2(q-1)!/lambda

double tensor_ou_c(const OUModel& model, int q);
double tensor_ou_variance(const OUModel& model, int q, double T);
double tensor_ou_variance_quadrature(const OUModel& model, int q, double T, int points = 16);

struct TensorNorms {
    std::map<std::pair<int, int>, double> contraction;  // (r, l) -> ||F_T *_r^l F_T||
    double l4_mass = 0.0;                               // int F_T^4
    double variance = 0.0;                              // E M_T^2 = q! ||F_T||^2
};
TensorNorms tensor_ou_contraction_norms(const OUModel& model, int q, double T,
                                        const Stationary4DOptions& opt = {});
Stationary4DOptions ou_quadrature_options(const OUModel& model, int q);

BoundReport tensor_ou_bound(const OUModel& model, int q, double T, const Stationary4DOptions& opt = {});

// ---- quadratic functional Q(T, lambda) = I_1(sqrt(T) H*) + I_2(sqrt(T) H)

enum class QuadraticNormalization {
    variance_matched,  // sqrt(2/lambda + nu_4): Var -> 1
    printed            // sqrt(1/lambda + nu_4)
};
double quadratic_normalization(const OUModel& model, QuadraticNormalization n);

SinglePlusDoubleNorms ou_quadratic_norms(const OUModel& model, double T, QuadraticNormalization n,
                                         const Stationary4DOptions& opt = {});
BoundReport ou_quadratic_bound(const OUModel& model, double T,
                               QuadraticNormalization n = QuadraticNormalization::variance_matched,
                               const Stationary4DOptions& opt = {});

// ---- linear functional A_T = N^(h_T)

// h_T(u, x) = u T^{-1/2} e^{lambda x} (e^{-lambda max(x, 0)} - e^{-lambda T}) for x <= T.
double ou_linear_kernel(const OUModel& model, double T, double u, double x);
// The same value through numeric inner time integration.
double ou_linear_kernel_numeric(const OUModel& model, double T, double u, double x);
double ou_linear_variance_defect(const OUModel& model, double T);
double ou_linear_cubic_mass(const OUModel& model, double T);
BoundReport ou_linear_bound(const OUModel& model, double T);

// ---- cell-averaged kernels on (jump atoms) x (x-cells over [-x0, T])

struct OUGrid {
    double h = 0.1;      // x-cell width
    double x0 = 40.0;    // left truncation, in units of 1/lambda
    int time_points = 8; // Gauss points per time panel
};

struct OUDiscretization {
    SpacePtr space;
    std::vector<double> x_edges;
    std::size_t n_u = 0;
    std::size_t n_x = 0;
};
OUDiscretization ou_discretize(const OUModel& model, double T, const OUGrid& grid);

// Conditional expectations of the continuum kernels given the cells.
Kernel ou_tensor_kernel(const OUModel& model, const OUDiscretization& d, int q, double T, const OUGrid& grid);
std::pair<Kernel, Kernel> ou_quadratic_kernels(const OUModel& model, const OUDiscretization& d, double T,
                                               QuadraticNormalization n, const OUGrid& grid);
Kernel ou_linear_kernel_cells(const OUModel& model, const OUDiscretization& d, double T, const OUGrid& grid);

// Dense-kernel cross-check of ou_quadratic_bound; resolution error if the
// variance defect exceeds 0.05.
BoundReport ou_quadratic_bound_discretized(const OUModel& model, double T, const OUGrid& grid,
                                           QuadraticNormalization n = QuadraticNormalization::variance_matched);

// ---- rates

struct RateFit {
    std::vector<double> log_T;
    std::vector<double> log_bound;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// sup over the grid of total * sqrt(T).
double effective_constant(const std::vector<std::pair<double, double>>& points);

}  // namespace pstein
