#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poisson_stein/chaos.hpp"

namespace pstein {

enum class BoundMethod { closed_form, monte_carlo };
const char* to_string(BoundMethod m);

struct BoundItem {
    std::string label;
    double value = 0.0;
};

// total is the sum of `items`; `diagnostics` carry auxiliary quantities that
// do not enter the total (raw norms, alternative forms, standard errors).
struct BoundReport {
    double total = 0.0;
    std::vector<BoundItem> items;
    std::vector<BoundItem> diagnostics;
    std::string inputs_digest;
    BoundMethod method = BoundMethod::closed_form;
    std::optional<double> mc_std_error;

    // Looks in items first, then diagnostics; throws if absent.
    double value(const std::string& label) const;
    bool has(const std::string& label) const;
    void add_item(std::string label, double v);
    void add_diagnostic(std::string label, double v);
    void finalize();  // total = sum of items
};

std::string kernel_digest(const std::vector<const Kernel*>& kernels);

BoundReport bound_first_chaos(const Kernel& h);

enum class FixedChaosMode { exact_G, contraction_estimate };
FixedChaosMode parse_fixed_chaos_mode(const std::string& s);
BoundReport bound_fixed_chaos(const Kernel& f, FixedChaosMode mode);

// Contraction-norm inputs of the single-plus-double bound.
struct SinglePlusDoubleNorms {
    double g_sq = 0.0;         // ||g||^2
    double h_sq = 0.0;         // ||h||^2
    double h21 = 0.0;          // ||h *_2^1 h||
    double h11 = 0.0;          // ||h *_1^1 h||
    double gh11 = 0.0;         // ||g *_1^1 h||
    double g_cubic = 0.0;      // ||g||_{L^3}^3
    double h_l4_sq = 0.0;      // ||h||_{L^4}^2
};
SinglePlusDoubleNorms single_plus_double_norms(const Kernel& g, const Kernel& h);
BoundReport assemble_single_plus_double(const SinglePlusDoubleNorms& n);
BoundReport bound_single_plus_double(const Kernel& g, const Kernel& h);

BoundReport estimate_general_bound(const ChaosExpansion& F, std::size_t n_samples, std::uint64_t seed,
                                   std::size_t threads = 0);

struct ChaosDiagnostics {
    std::map<std::pair<int, int>, double> contraction_norms;
    double l4_mass = 0.0;
    double variance = 0.0;
    std::optional<double> kurtosis_mc;
    std::optional<double> kurtosis_std_error;
};
ChaosDiagnostics chaos_diagnostics(const Kernel& f, std::optional<std::size_t> mc_samples = std::nullopt,
                                   std::uint64_t seed = 1, std::size_t threads = 0);

// Coefficient of each contraction norm in the estimate chain for order q, with
// the a = 0 norms rewritten through ||f *_b^0 f|| = ||f *_q^{q-b} f|| and
// ||f *_q^0 f|| = (int f^4)^{1/2}. Key (q, 0) stands for the L^4 term.
// `multiplier` is q^2 sqrt((q-1)! ||f||^2).
std::map<std::pair<int, int>, double> estimate_chain_coefficients(int q, double multiplier);

// The q = 3 coefficients exactly as printed in the six-term example under
// 3! ||f||^2 = 1, keyed like estimate_chain_coefficients.
std::map<std::pair<int, int>, double> printed_triple_coefficients();

}  // namespace pstein
