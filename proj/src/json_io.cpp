#include "poisson_stein/json_io.hpp"

#include <fstream>
#include <sstream>

#include "poisson_stein/error.hpp"

namespace pstein {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(errc::parse, "'" + path + "': " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(errc::io, "write failed for '" + path + "'");
}

namespace {

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(errc::parse, std::string(what) + ": " + e.what());
    }
}

}  // namespace

json to_json(const DiscreteSpace& space) {
    json cells = json::array();
    for (std::size_t c = 0; c < space.size(); ++c) {
        json cell = {{"weight", space.weight(c)}};
        if (space.has_labels()) cell["label"] = space.label(c);
        cells.push_back(std::move(cell));
    }
    return {{"cells", std::move(cells)}, {"truncated", space.truncated()}};
}

SpacePtr space_from_json(const json& j) {
    return guarded("space", [&] {
        if (!j.is_object() || !j.contains("cells")) fail(errc::parse, "space: missing 'cells'");
        std::vector<double> w;
        std::vector<std::vector<double>> labels;
        bool any_label = false;
        for (const auto& cell : j.at("cells")) {
            w.push_back(cell.at("weight").get<double>());
            std::vector<double> lab;
            if (cell.contains("label")) {
                any_label = true;
                const auto& l = cell.at("label");
                if (l.is_number()) lab.push_back(l.get<double>());
                else lab = l.get<std::vector<double>>();
            }
            labels.push_back(std::move(lab));
        }
        bool truncated = j.value("truncated", false);
        if (!any_label) return std::make_shared<const DiscreteSpace>(std::move(w), truncated);
        return std::make_shared<const DiscreteSpace>(std::move(w), std::move(labels), truncated);
    });
}

json to_json(const Kernel& f, bool embed_space) {
    json j = {{"order", f.order()},
              {"shape", std::vector<std::size_t>(static_cast<std::size_t>(f.order()), f.cells())},
              {"values", std::vector<double>(f.values().begin(), f.values().end())}};
    if (embed_space) j["space"] = to_json(f.space());
    return j;
}

Kernel kernel_from_json(const json& j, const SpacePtr& space) {
    return guarded("kernel", [&] {
        SpacePtr sp = j.contains("space") ? space_from_json(j.at("space")) : space;
        if (!sp) fail(errc::argument, "kernel: no space given (embed \"space\" or pass --space)");
        int q = j.at("order").get<int>();
        if (q < 0) fail(errc::parse, "kernel: negative order");
        if (j.contains("shape")) {
            auto shape = j.at("shape").get<std::vector<std::size_t>>();
            if (shape.size() != static_cast<std::size_t>(q))
                fail(errc::parse, "kernel: shape rank differs from order");
            for (auto s : shape)
                if (s != sp->size()) fail(errc::space_mismatch, "kernel: shape does not match the space size");
        }
        return Kernel(sp, q, j.at("values").get<std::vector<double>>());
    });
}

json to_json(const ChaosExpansion& F, bool embed_space) {
    json orders = json::object();
    for (const auto& [n, k] : F.kernels()) orders[std::to_string(n)] = to_json(k);
    json j = {{"constant", F.constant()}, {"orders", std::move(orders)}};
    if (embed_space) j["space"] = to_json(F.space());
    return j;
}

ChaosExpansion chaos_from_json(const json& j, const SpacePtr& space) {
    return guarded("chaos", [&] {
        SpacePtr sp = j.contains("space") ? space_from_json(j.at("space")) : space;
        if (!sp) fail(errc::argument, "chaos: no space given (embed \"space\" or pass --space)");
        std::vector<Kernel> ks;
        if (j.contains("orders"))
            for (const auto& [key, kj] : j.at("orders").items()) {
                Kernel k = kernel_from_json(kj, sp);
                if (std::to_string(k.order()) != key) fail(errc::parse, "chaos: order key '" + key + "' differs from kernel order");
                ks.push_back(std::move(k));
            }
        return ChaosExpansion(sp, j.value("constant", 0.0), std::move(ks));
    });
}

PoissonSample sample_from_json(const json& j, const DiscreteSpace& space) {
    return guarded("sample", [&] {
        auto counts = j.at("counts").get<std::vector<std::int64_t>>();
        if (counts.size() != space.size()) fail(errc::space_mismatch, "sample: counts do not match the space size");
        PoissonSample s;
        s.counts = counts;
        s.centered.resize(counts.size());
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] < 0) fail(errc::parse, "sample: negative count");
            s.centered[c] = static_cast<double>(counts[c]) - space.weight(c);
        }
        return s;
    });
}

json to_json(const BoundReport& r) {
    json items = json::object(), diag = json::object();
    json order = json::array();
    for (const auto& it : r.items) {
        items[it.label] = it.value;
        order.push_back(it.label);
    }
    for (const auto& it : r.diagnostics) diag[it.label] = it.value;
    json j = {{"total", r.total},
              {"items", std::move(items)},
              {"item_order", std::move(order)},
              {"diagnostics", std::move(diag)},
              {"inputs_digest", r.inputs_digest},
              {"method", to_string(r.method)}};
    if (r.mc_std_error) j["mc_std_error"] = *r.mc_std_error;
    return j;
}

json to_json(const SampleStats& s) {
    return {{"n", s.n},
            {"mean", s.mean},
            {"variance", s.variance},
            {"third", s.third},
            {"fourth", s.fourth},
            {"kurtosis", s.kurtosis},
            {"mean_std_error", s.mean_std_error},
            {"kurtosis_std_error", s.kurtosis_std_error}};
}

}  // namespace pstein
