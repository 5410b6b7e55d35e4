#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "poisson_stein/chaos.hpp"
#include "poisson_stein/error.hpp"
#include "poisson_stein/json_io.hpp"
#include "poisson_stein/ou.hpp"
#include "poisson_stein/parallel.hpp"
#include "poisson_stein/simulator.hpp"
#include "poisson_stein/stein_bounds.hpp"

using namespace pstein;

namespace {

struct Options {
    std::string config;
    std::size_t threads = 0;

    // kernel / chaos
    std::string op;
    std::string space;
    std::string kernel;
    std::string other;
    std::string chaos;
    std::string sample;
    int r = 1;
    int l = 0;
    double p = 2.0;
    std::string out;

    // bound
    std::string mode = "contraction_estimate";
    bool first_chaos = false;
    std::string g;
    std::string h;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;

    // simulate
    std::string dump_values;

    // experiment
    std::string kind;
    int q = 2;
    double lambda = 1.0;
    std::string nu = "rademacher";
    std::vector<double> T_grid{10, 20, 40, 80};
    std::string csv;
    std::string method = "quadrature";
    std::string normalization = "variance-matched";
    double grid_h = 0.1;
    double x0 = 40.0;
};

void emit(const json& j, const std::string& out) {
    std::string text = j.dump(2) + "\n";
    if (out.empty()) std::cout << text;
    else write_text_file(out, text);
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

// Values from --config fill options the command line left unset.
void apply_config(const std::string& path, CLI::App& app, CLI::App* sub) {
    json cfg = read_json_file(path);
    if (!cfg.is_object()) fail(errc::parse, "config: top level must be an object");
    auto assign = [](CLI::Option* opt, const json& v) {
        if (opt->count() > 0) return;
        std::vector<std::string> inputs;
        auto as_text = [](const json& x) {
            if (x.is_string()) return x.get<std::string>();
            if (x.is_boolean()) return std::string(x.get<bool>() ? "true" : "false");
            return x.dump();
        };
        if (v.is_array())
            for (const auto& e : v) inputs.push_back(as_text(e));
        else
            inputs.push_back(as_text(v));
        for (auto& s : inputs) opt->add_result(s);
        opt->run_callback();
    };
    auto find = [](CLI::App* a, const std::string& key) -> CLI::Option* {
        return a ? a->get_option_no_throw("--" + key) : nullptr;
    };
    for (const auto& [key, v] : cfg.items()) {
        if (v.is_object()) continue;
        if (auto* o = find(sub, key)) assign(o, v);
        else if (auto* o2 = find(&app, key)) assign(o2, v);
    }
    if (sub && cfg.contains(sub->get_name())) {
        const auto& section = cfg.at(sub->get_name());
        if (!section.is_object()) fail(errc::parse, "config: section '" + sub->get_name() + "' must be an object");
        for (const auto& [key, v] : section.items()) {
            auto* o = find(sub, key);
            if (!o) fail(errc::argument, "config: unknown option '" + key + "' for " + sub->get_name());
            assign(o, v);
        }
    }
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) fail(errc::argument, std::string("missing required option ") + flag);
}

SpacePtr optional_space(const Options& o) {
    return o.space.empty() ? nullptr : space_from_json(read_json_file(o.space));
}

int run_kernel(const Options& o) {
    require(o.kernel, "--kernel");
    SpacePtr sp = optional_space(o);
    Kernel f = kernel_from_json(read_json_file(o.kernel), sp);
    json result;
    if (o.op == "load") {
        result = {{"order", f.order()},
                  {"cells", f.cells()},
                  {"symmetric", f.symmetric()},
                  {"diagonal_free", f.diagonal_free()},
                  {"l2_norm", lp_norm(f, 2)},
                  {"digest", kernel_digest({&f})}};
    } else if (o.op == "contract") {
        require(o.other, "--other");
        Kernel g = kernel_from_json(read_json_file(o.other), f.space_ptr());
        result = to_json(contract(f, g, o.r, o.l), true);
    } else if (o.op == "norm") {
        result = {{"p", o.p}, {"mass", lp_mass(f, o.p)}, {"norm", lp_norm(f, o.p)}};
    } else if (o.op == "symmetrize") {
        result = to_json(symmetrize(f), true);
    } else {
        fail(errc::argument, "unknown kernel operation '" + o.op + "'");
    }
    emit(result, o.out);
    return 0;
}

json family_to_json(const KernelFamily& u) {
    json at = json::array();
    for (const auto& F : u.at) at.push_back(to_json(F));
    return {{"space", to_json(*u.space)}, {"at", std::move(at)}};
}

KernelFamily family_from_json(const json& j, const SpacePtr& fallback) {
    SpacePtr sp = j.contains("space") ? space_from_json(j.at("space")) : fallback;
    if (!sp) fail(errc::argument, "family: no space given");
    if (!j.contains("at") || !j.at("at").is_array()) fail(errc::parse, "family: missing 'at' array");
    KernelFamily u{sp, {}};
    for (const auto& e : j.at("at")) u.at.push_back(chaos_from_json(e, sp));
    return u;
}

int run_chaos(const Options& o) {
    require(o.chaos, "--chaos");
    SpacePtr sp = optional_space(o);
    json in = read_json_file(o.chaos);
    json result;
    if (o.op == "delta") {
        result = to_json(skorohod(family_from_json(in, sp)), true);
        emit(result, o.out);
        return 0;
    }
    ChaosExpansion F = chaos_from_json(in, sp);
    if (o.op == "multiply") {
        require(o.other, "--other");
        ChaosExpansion G = chaos_from_json(read_json_file(o.other), F.space_ptr());
        result = to_json(multiply(F, G), true);
    } else if (o.op == "D") {
        result = family_to_json(apply_D(F));
    } else if (o.op == "L") {
        result = to_json(apply_L(F), true);
    } else if (o.op == "Linv") {
        result = to_json(apply_L_inverse(F), true);
    } else if (o.op == "eval-on-sample") {
        require(o.sample, "--sample");
        PoissonSample s = sample_from_json(read_json_file(o.sample), F.space());
        result = {{"value", evaluate(F, s)}};
    } else {
        fail(errc::argument, "unknown chaos operation '" + o.op + "'");
    }
    emit(result, o.out);
    return 0;
}

int run_bound(const Options& o) {
    SpacePtr sp = optional_space(o);
    std::string mode = o.first_chaos ? "first-chaos" : o.mode;
    BoundReport r;
    if (mode == "first-chaos") {
        require(o.kernel, "--kernel");
        r = bound_first_chaos(kernel_from_json(read_json_file(o.kernel), sp));
    } else if (mode == "exact_G" || mode == "contraction_estimate") {
        require(o.kernel, "--kernel");
        r = bound_fixed_chaos(kernel_from_json(read_json_file(o.kernel), sp), parse_fixed_chaos_mode(mode));
    } else if (mode == "single-plus-double") {
        require(o.g, "--g-kernel");
        require(o.h, "--h-kernel");
        Kernel g = kernel_from_json(read_json_file(o.g), sp);
        Kernel h = kernel_from_json(read_json_file(o.h), g.space_ptr());
        r = bound_single_plus_double(g, h);
    } else if (mode == "general") {
        require(o.chaos, "--chaos");
        r = estimate_general_bound(chaos_from_json(read_json_file(o.chaos), sp), o.samples, o.seed, o.threads);
    } else {
        fail(errc::argument, "unknown bound mode '" + mode + "'");
    }
    emit(to_json(r), o.out);
    return 0;
}

int run_simulate(const Options& o) {
    require(o.chaos, "--chaos");
    if (o.samples == 0) fail(errc::argument, "--samples must be positive");
    ChaosExpansion F = chaos_from_json(read_json_file(o.chaos), optional_space(o));
    std::vector<double> values = sample_values(F, o.samples, o.seed, o.threads);
    SampleStats st = summarize(values);
    json j = to_json(st);
    j["seed"] = o.seed;
    if (values.size() >= 100) j["w1_to_normal"] = empirical_w1(values);
    emit(j, o.out);
    if (!o.dump_values.empty()) {
        std::string text;
        for (double v : values) text += fmt(v) + "\n";
        write_text_file(o.dump_values, text);
    }
    return 0;
}

int run_experiment(const Options& o) {
    if (o.kind != "ou-linear" && o.kind != "ou-quadratic" && o.kind != "ou-tensor")
        fail(errc::argument, "unknown experiment '" + o.kind + "'");
    if (o.T_grid.empty()) fail(errc::argument, "--T-grid is empty");
    if (o.method != "quadrature" && o.method != "discretized")
        fail(errc::argument, "unknown method '" + o.method + "'");
    QuadraticNormalization norm;
    if (o.normalization == "variance-matched") norm = QuadraticNormalization::variance_matched;
    else if (o.normalization == "printed") norm = QuadraticNormalization::printed;
    else fail(errc::argument, "unknown normalization '" + o.normalization + "'");

    OUModel model = OUModel::make(o.lambda, parse_nu(o.nu));
    OUGrid grid;
    grid.h = o.grid_h;
    grid.x0 = o.x0;
    const bool disc = o.method == "discretized";

    std::vector<BoundReport> reports;
    for (double T : o.T_grid) {
        if (!(T > 0.0)) fail(errc::argument, "T values must be positive");
        if (o.kind == "ou-linear") {
            if (disc) {
                OUDiscretization d = ou_discretize(model, T, grid);
                reports.push_back(bound_first_chaos(ou_linear_kernel_cells(model, d, T, grid)));
            } else {
                reports.push_back(ou_linear_bound(model, T));
            }
        } else if (o.kind == "ou-quadratic") {
            reports.push_back(disc ? ou_quadratic_bound_discretized(model, T, grid, norm)
                                   : ou_quadratic_bound(model, T, norm));
        } else {
            if (disc) {
                OUDiscretization d = ou_discretize(model, T, grid);
                reports.push_back(bound_fixed_chaos(ou_tensor_kernel(model, d, o.q, T, grid),
                                                    FixedChaosMode::contraction_estimate));
            } else {
                reports.push_back(tensor_ou_bound(model, o.q, T));
            }
        }
    }

    std::vector<std::string> labels;
    for (const auto& it : reports.front().items) labels.push_back(it.label);

    std::vector<std::pair<double, double>> totals;
    for (std::size_t i = 0; i < reports.size(); ++i) totals.emplace_back(o.T_grid[i], reports[i].total);

    json points = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i)
        points.push_back({{"T", o.T_grid[i]}, {"report", to_json(reports[i])}});
    json j = {{"experiment", o.kind},
              {"lambda", o.lambda},
              {"nu", o.nu},
              {"method", o.method},
              {"points", std::move(points)},
              {"effective_constant", effective_constant(totals)},
              {"effective_constant_note", "supremum of total*sqrt(T) over the grid, not a proved constant"}};
    if (o.kind == "ou-tensor") j["q"] = o.q;
    if (o.kind == "ou-quadratic") j["normalization"] = o.normalization;

    std::optional<RateFit> fit;
    if (totals.size() >= 4) {
        fit = fit_rate(totals);
        j["fit"] = {{"slope", fit->slope}, {"intercept", fit->intercept}, {"r_squared", fit->r_squared}};
        json item_slopes = json::object();
        for (const auto& lab : labels) {
            std::vector<std::pair<double, double>> pts;
            bool positive = true;
            for (std::size_t i = 0; i < reports.size(); ++i) {
                double v = reports[i].value(lab);
                positive = positive && v > 0.0;
                pts.emplace_back(o.T_grid[i], v);
            }
            if (positive) item_slopes[lab] = fit_rate(pts).slope;
        }
        j["item_slopes"] = std::move(item_slopes);
    }
    emit(j, o.out);

    if (!o.csv.empty()) {
        std::string text = "T";
        for (const auto& lab : labels) text += "," + lab;
        text += ",total,total_sqrtT\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            text += fmt(o.T_grid[i]);
            for (const auto& lab : labels) text += "," + fmt(reports[i].value(lab));
            text += "," + fmt(reports[i].total) + "," + fmt(reports[i].total * std::sqrt(o.T_grid[i])) + "\n";
        }
        if (fit)
            text += "# slope=" + fmt(fit->slope) + " intercept=" + fmt(fit->intercept) +
                    " r_squared=" + fmt(fit->r_squared) + "\n";
        else
            text += "# slope unavailable: fewer than 4 T values\n";
        write_text_file(o.csv, text);
    }
    return 0;
}

void print_error(const std::string& label, const std::string& message) {
    std::cerr << json{{"label", label}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Stein bounds and chaos calculus on discretized Poisson spaces"};
    app.require_subcommand(1);
    app.add_option("--config", o.config, "JSON config; flags override it, it overrides defaults");
    app.add_option("--threads", o.threads, "worker threads (default: POISSON_STEIN_THREADS, else hardware)");

    auto* kernel = app.add_subcommand("kernel", "load, contract, norm or symmetrize a kernel");
    kernel->add_option("op", o.op, "load | contract | norm | symmetrize")->required();
    kernel->add_option("--kernel", o.kernel, "kernel JSON");
    kernel->add_option("--other", o.other, "second kernel for contract");
    kernel->add_option("--space", o.space, "space JSON when the kernel does not embed one");
    kernel->add_option("-r,--r", o.r, "identified variables for contract");
    kernel->add_option("-l,--l", o.l, "integrated variables for contract");
    kernel->add_option("-p,--p", o.p, "exponent for norm");
    kernel->add_option("--out", o.out, "output file (default stdout)");

    auto* chaos = app.add_subcommand("chaos", "chaos expansion operations");
    chaos->add_option("op", o.op, "multiply | D | L | Linv | delta | eval-on-sample")->required();
    chaos->add_option("--chaos", o.chaos, "chaos JSON (a family {\"at\":[...]} for delta)");
    chaos->add_option("--other", o.other, "second chaos for multiply");
    chaos->add_option("--sample", o.sample, "sample JSON {\"counts\":[...]} for eval-on-sample");
    chaos->add_option("--space", o.space, "space JSON when the input does not embed one");
    chaos->add_option("--out", o.out, "output file (default stdout)");

    auto* bound = app.add_subcommand("bound", "Wasserstein bound report");
    bound->add_option("--mode", o.mode,
                      "first-chaos | exact_G | contraction_estimate | single-plus-double | general");
    bound->add_flag("--first-chaos", o.first_chaos, "shorthand for --mode first-chaos");
    bound->add_option("--kernel", o.kernel, "kernel JSON for the single-chaos modes");
    bound->add_option("--g-kernel", o.g, "order-1 kernel for single-plus-double");
    bound->add_option("--h-kernel", o.h, "order-2 kernel for single-plus-double");
    bound->add_option("--chaos", o.chaos, "chaos JSON for general");
    bound->add_option("--space", o.space, "space JSON when inputs do not embed one");
    bound->add_option("--samples", o.samples, "Monte Carlo samples for general");
    bound->add_option("--seed", o.seed, "seed for general");
    bound->add_option("--out", o.out, "output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "sample a chaos expansion");
    simulate->add_option("--space", o.space, "space JSON when the chaos does not embed one");
    simulate->add_option("--chaos", o.chaos, "chaos JSON");
    simulate->add_option("--samples", o.samples, "number of samples");
    simulate->add_option("--seed", o.seed, "seed");
    simulate->add_option("--out", o.out, "stats JSON (default stdout)");
    simulate->add_option("--dump-values", o.dump_values, "one sampled value per line");

    auto* experiment = app.add_subcommand("experiment", "Ornstein-Uhlenbeck rate experiments");
    experiment->add_option("kind", o.kind, "ou-linear | ou-quadratic | ou-tensor")->required();
    experiment->add_option("--q", o.q, "tensor order for ou-tensor");
    experiment->add_option("--lambda", o.lambda, "mean-reversion rate");
    experiment->add_option("--nu", o.nu, "jump law: rademacher | exponential");
    experiment->add_option("--T-grid", o.T_grid, "comma-separated horizons")->delimiter(',');
    experiment->add_option("--out", o.out, "report JSON (default stdout)");
    experiment->add_option("--csv", o.csv, "rates CSV: T, items, total, total_sqrtT; fit in footer");
    experiment->add_option("--method", o.method, "quadrature | discretized");
    experiment->add_option("--normalization", o.normalization, "variance-matched | printed (ou-quadratic)");
    experiment->add_option("--grid-h", o.grid_h, "x-cell width for discretized");
    experiment->add_option("--x0", o.x0, "left truncation in units of 1/lambda for discretized");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(errc::argument, e.what());
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!o.config.empty()) apply_config(o.config, app, sub);
        if (o.threads > 0) set_default_threads(o.threads);
        if (sub == kernel) return run_kernel(o);
        if (sub == chaos) return run_chaos(o);
        if (sub == bound) return run_bound(o);
        if (sub == simulate) return run_simulate(o);
        return run_experiment(o);
    } catch (const Error& e) {
        print_error(e.label(), e.what());
    } catch (const CLI::ParseError& e) {
        print_error(errc::argument, e.what());
    } catch (const std::exception& e) {
        print_error(errc::argument, e.what());
    }
    return 2;
}
