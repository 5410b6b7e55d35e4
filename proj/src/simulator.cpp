#include "poisson_stein/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "poisson_stein/error.hpp"
#include "poisson_stein/parallel.hpp"

namespace pstein {

std::int64_t PoissonSample::occupancy(std::size_t cell) const {
    std::int64_t n = counts.at(cell);
    for (std::size_t e : extra_points) n += (e == cell);
    return n;
}

PoissonSample PoissonSample::with_extra_point(std::size_t z, const DiscreteSpace& space) const {
    if (z >= space.size() || z >= counts.size())
        fail(errc::invalid_index, "extra point cell " + std::to_string(z) + " out of range");
    PoissonSample s(*this);
    s.extra_points.push_back(z);
    s.centered[z] += 1.0;
    return s;
}

SampleGenerator::SampleGenerator(SpacePtr space) : space_(std::move(space)) {
    samplers_.reserve(space_->size());
    for (double w : space_->weights()) samplers_.emplace_back(w);
}

PoissonSample SampleGenerator::operator()(std::uint64_t seed, std::uint64_t ordinal) const {
    const std::size_t m = space_->size();
    PoissonSample s;
    s.counts.resize(m);
    s.centered.resize(m);
    for (std::size_t c = 0; c < m; ++c) {
        CounterStream stream(seed, ordinal, static_cast<std::uint32_t>(c));
        s.counts[c] = samplers_[c](stream);
        s.centered[c] = static_cast<double>(s.counts[c]) - space_->weights()[c];
    }
    return s;
}

PoissonSample sample(const SpacePtr& space, std::uint64_t seed, std::uint64_t ordinal) {
    return SampleGenerator(space)(seed, ordinal);
}

double charlier(int k, double n, double w) {
    if (k < 0) fail(errc::argument, "Charlier degree must be nonnegative");
    double prev = 1.0;
    if (k == 0) return prev;
    double cur = n - w;
    for (int j = 1; j < k; ++j) {
        double next = (n - w - j) * cur - j * w * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

// table[k][c] = C_k(N_c, w_c) with N_c the occupancy (counts plus extra points).
std::vector<std::vector<double>> charlier_table(const DiscreteSpace& space, const PoissonSample& s, int top) {
    const std::size_t m = space.size();
    if (s.centered.size() != m) fail(errc::space_mismatch, "sample does not match the space");
    std::vector<std::vector<double>> t(top + 1, std::vector<double>(m));
    for (std::size_t c = 0; c < m; ++c) {
        double w = space.weights()[c];
        double n = s.centered[c] + w;
        n = std::round(n);
        t[0][c] = 1.0;
        if (top >= 1) t[1][c] = s.centered[c];
        for (int k = 1; k < top; ++k) t[k + 1][c] = (n - w - k) * t[k][c] - k * w * t[k - 1][c];
    }
    return t;
}

double evaluate_literal(const Kernel& f, const std::vector<std::vector<double>>& C) {
    const int q = f.order();
    const std::size_t m = f.cells();
    auto v = f.values();
    const double qfact = factorial(q);
    std::vector<std::size_t> idx(q, 0);
    double total = 0.0;
    // f is symmetric: visit each multiset once with its count of orderings.
    while (true) {
        std::size_t flat = 0;
        for (std::size_t c : idx) flat = flat * m + c;
        double value = v[flat];
        if (value != 0.0) {
            double prod = 1.0;
            double perms = qfact;
            int j = 0;
            while (j < q) {
                int k = 1;
                while (j + k < q && idx[j + k] == idx[j]) ++k;
                prod *= C[k][idx[j]];
                perms /= factorial(k);
                j += k;
            }
            total += perms * value * prod;
        }
        int k = q - 1;
        while (k >= 0 && idx[k] == m - 1) --k;
        if (k < 0) break;
        ++idx[k];
        for (int i = k + 1; i < q; ++i) idx[i] = idx[k];
    }
    return total;
}

struct FastBlock {
    std::vector<int> positions;
    std::vector<int> parts;  // sizes of the finer blocks merged here
};

struct FastTerm {
    double mu = 1.0;
    std::vector<FastBlock> blocks;
};

std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    if (n == 0) {
        out.push_back({});
        return out;
    }
    std::vector<int> a(n, 0);
    while (true) {
        out.push_back(a);
        int i = n - 1;
        while (i > 0) {
            int mx = *std::max_element(a.begin(), a.begin() + i);
            if (a[i] <= mx) break;
            --i;
        }
        if (i == 0) break;
        ++a[i];
        for (int j = i + 1; j < n; ++j) a[j] = 0;
    }
    return out;
}

std::vector<FastTerm> build_terms(int n) {
    std::vector<FastTerm> terms;
    for (const auto& pi : set_partitions(n)) {
        int b = pi.empty() ? 0 : *std::max_element(pi.begin(), pi.end()) + 1;
        for (const auto& sigma : set_partitions(b)) {
            int nb = sigma.empty() ? 0 : *std::max_element(sigma.begin(), sigma.end()) + 1;
            FastTerm term;
            term.blocks.resize(nb);
            std::vector<int> merged(nb, 0);
            for (int B = 0; B < b; ++B) {
                merged[sigma[B]] += 1;
                int size = 0;
                for (int i = 0; i < n; ++i)
                    if (pi[i] == B) {
                        term.blocks[sigma[B]].positions.push_back(i);
                        ++size;
                    }
                term.blocks[sigma[B]].parts.push_back(size);
            }
            for (int j : merged) term.mu *= ((j - 1) % 2 == 0 ? 1.0 : -1.0) * factorial(j - 1);
            terms.push_back(std::move(term));
        }
    }
    return terms;
}

const std::vector<FastTerm>& fast_terms(int n) {
    static const std::vector<std::vector<FastTerm>> table = [] {
        std::vector<std::vector<FastTerm>> t;
        for (int k = 0; k <= max_fast_order; ++k) t.push_back(build_terms(k));
        return t;
    }();
    return table[n];
}

double contract_blocks(const double* f, const std::vector<std::size_t>& stride,
                       const std::vector<std::vector<double>>& vec, std::size_t m, std::size_t level,
                       std::size_t offset) {
    const double* v = vec[level].data();
    const std::size_t s = stride[level];
    double acc = 0.0;
    if (level + 1 == vec.size()) {
        if (s == 1) {
            const double* row = f + offset;
            for (std::size_t c = 0; c < m; ++c) acc += row[c] * v[c];
        } else {
            for (std::size_t c = 0; c < m; ++c) acc += f[offset + c * s] * v[c];
        }
        return acc;
    }
    for (std::size_t c = 0; c < m; ++c) {
        if (v[c] == 0.0) continue;
        acc += v[c] * contract_blocks(f, stride, vec, m, level + 1, offset + c * s);
    }
    return acc;
}

double evaluate_partitioned(const Kernel& f, const std::vector<std::vector<double>>& C) {
    const int q = f.order();
    const std::size_t m = f.cells();
    std::vector<std::size_t> pos_stride(q);
    if (q > 0) pos_stride[q - 1] = 1;
    for (int k = q - 1; k-- > 0;) pos_stride[k] = pos_stride[k + 1] * m;

    double total = 0.0;
    std::vector<std::size_t> stride;
    std::vector<std::vector<double>> vec;
    for (const FastTerm& term : fast_terms(q)) {
        // Innermost level gets the smallest stride.
        std::vector<std::pair<std::size_t, const FastBlock*>> order;
        for (const FastBlock& blk : term.blocks) {
            std::size_t s = 0;
            for (int p : blk.positions) s += pos_stride[p];
            order.emplace_back(s, &blk);
        }
        std::sort(order.begin(), order.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        stride.clear();
        vec.clear();
        for (const auto& [s, blk] : order) {
            stride.push_back(s);
            std::vector<double> v(m, 1.0);
            for (int size : blk->parts)
                for (std::size_t c = 0; c < m; ++c) v[c] *= C[size][c];
            vec.push_back(std::move(v));
        }
        total += term.mu * contract_blocks(f.values().data(), stride, vec, m, 0, 0);
    }
    return total;
}

}  // namespace

double evaluate(const ChaosExpansion& F, const PoissonSample& s) {
    auto C = charlier_table(F.space(), s, F.max_order());
    double value = F.constant();
    for (const auto& [n, f] : F.kernels()) value += evaluate_literal(f, C);
    return value;
}

double evaluate_fast(const ChaosExpansion& F, const PoissonSample& s) {
    if (F.max_order() > max_fast_order)
        fail(errc::unsupported_order, "evaluate_fast supports orders <= " + std::to_string(max_fast_order));
    auto C = charlier_table(F.space(), s, F.max_order());
    double value = F.constant();
    for (const auto& [n, f] : F.kernels()) {
        if (n == 1) {
            auto v = f.values();
            double acc = 0.0;
            for (std::size_t c = 0; c < v.size(); ++c) acc += v[c] * C[1][c];
            value += acc;
        } else {
            value += evaluate_partitioned(f, C);
        }
    }
    return value;
}

namespace {

double batch_kurtosis_error(std::span<const double> values) {
    const std::size_t n = values.size();
    const std::size_t batches = std::min<std::size_t>(20, n / 50);
    if (batches < 2) return std::nan("");
    std::vector<double> k(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        std::size_t lo = n * b / batches, hi = n * (b + 1) / batches;
        std::vector<double> part(values.begin() + lo, values.begin() + hi);
        double mean = 0.0;
        for (double x : part) mean += x;
        mean /= part.size();
        double m2 = 0.0, m4 = 0.0;
        for (double x : part) {
            double d = (x - mean) * (x - mean);
            m2 += d;
            m4 += d * d;
        }
        m2 /= part.size();
        m4 /= part.size();
        k[b] = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
    }
    double mean = 0.0;
    for (double x : k) mean += x;
    mean /= batches;
    double var = 0.0;
    for (double x : k) var += (x - mean) * (x - mean);
    var /= (batches - 1);
    return std::sqrt(var / batches);
}

}  // namespace

SampleStats summarize(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) fail(errc::insufficient_samples, "statistics need at least two values");
    SampleStats st;
    st.n = n;
    double sum = 0.0, comp = 0.0;
    for (double x : values) {
        double t = sum + x;
        comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    const double N = static_cast<double>(n);
    st.mean = (sum + comp) / N;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : values) {
        double d = x - st.mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= N;
    m3 /= N;
    m4 /= N;
    st.variance = m2 * N / (N - 1.0);
    st.third = m3;
    if (n >= 4) {
        st.fourth = (N * (N * N - 2.0 * N + 3.0) * m4 - 3.0 * N * (2.0 * N - 3.0) * m2 * m2) /
                    ((N - 1.0) * (N - 2.0) * (N - 3.0));
    } else {
        st.fourth = m4;
    }
    st.kurtosis = st.variance > 0.0 ? st.fourth / (st.variance * st.variance) : 0.0;
    st.mean_std_error = std::sqrt(st.variance / N);
    st.kurtosis_std_error = batch_kurtosis_error(values);
    st.sorted_values.assign(values.begin(), values.end());
    std::sort(st.sorted_values.begin(), st.sorted_values.end());
    return st;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double empirical_w1(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 100) fail(errc::insufficient_samples, "empirical W1 needs at least 100 values");
    std::vector<double> xs(values.begin(), values.end());
    for (double x : xs)
        if (!std::isfinite(x)) fail(errc::domain, "non-finite sample value");
    std::sort(xs.begin(), xs.end());

    constexpr double lo_grid = -8.0, step = 1e-3;
    constexpr int grid_points = 16001;
    std::vector<double> pts;
    pts.reserve(n + grid_points);
    {
        std::size_t i = 0;
        for (int k = 0; k < grid_points; ++k) {
            double g = lo_grid + k * step;
            while (i < n && xs[i] < g) pts.push_back(xs[i++]);
            pts.push_back(g);
        }
        while (i < n) pts.push_back(xs[i++]);
    }
    const double a = pts.front();
    const double b = pts.back();
    // Exact tails: F_n = 0 below a and 1 above b.
    double total = a * normal_cdf(a) + normal_pdf(a);
    total += normal_pdf(b) - b * (1.0 - normal_cdf(b));

    std::size_t below = 0;  // number of values <= current left endpoint
    const double N = static_cast<double>(n);
    double phi_left = normal_cdf(a);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        double x0 = pts[k], x1 = pts[k + 1];
        while (below < n && xs[below] <= x0) ++below;
        double phi_right = normal_cdf(x1);
        if (x1 > x0) {
            double Fn = static_cast<double>(below) / N;
            double d0 = Fn - phi_left, d1 = Fn - phi_right;
            double h = x1 - x0;
            if (d0 * d1 >= 0.0) {
                total += 0.5 * h * (std::abs(d0) + std::abs(d1));
            } else {
                // Linear interpolation of the crossing keeps the kink inside the segment.
                double t = d0 / (d0 - d1);
                total += 0.5 * h * (t * std::abs(d0) + (1.0 - t) * std::abs(d1));
            }
        }
        phi_left = phi_right;
    }
    return total;
}

std::vector<double> sample_values(const ChaosExpansion& F, std::size_t n_samples, std::uint64_t seed,
                                  std::size_t threads) {
    SampleGenerator gen(F.space_ptr());
    const bool fast = F.max_order() <= max_fast_order;
    std::vector<double> values(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            PoissonSample s = gen(seed, i);
            values[i] = fast ? evaluate_fast(F, s) : evaluate(F, s);
        }
    });
    return values;
}

SampleStats run_experiment(const ChaosExpansion& F, std::size_t n_samples, std::uint64_t seed,
                           std::size_t threads) {
    auto values = sample_values(F, n_samples, seed, threads);
    return summarize(values);
}

}  // namespace pstein
