// Copyright (c) 2026 the zcgauge authors.
// Licensed under the Apache License, Version 2.0.

#include "zcgauge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace zcgauge::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const RankedPair& p) {
    if (p.ground.size() != p.pred.size())
        throw std::invalid_argument("ranked pair: length mismatch");
    if (p.ground.size() < 2) throw std::invalid_argument("ranked pair: need M >= 2");
}

}  // namespace

std::vector<double> descending_ranks(const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (v[a] != v[b]) return v[a] > v[b];
        return a < b;
    });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("pearson: need n >= 2");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0)
        throw std::invalid_argument("pearson: undefined for constant input");
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const RankedPair& pair) {
    check_pair(pair);
    return pearson(descending_ranks(pair.ground), descending_ranks(pair.pred));
}

double precision_at_k(const RankedPair& pair, int k) {
    check_pair(pair);
    const int m = static_cast<int>(pair.ground.size());
    if (k < 1 || k > m) throw std::invalid_argument("precision_at_k: K out of range");
    const auto gr = descending_ranks(pair.ground);
    const auto pr = descending_ranks(pair.pred);
    int hits = 0;
    for (int i = 0; i < m; ++i)
        if (gr[static_cast<size_t>(i)] < k && pr[static_cast<size_t>(i)] < k) ++hits;
    return static_cast<double>(hits) / k;
}

double best_ranking_at_k(const RankedPair& pair, int k) {
    check_pair(pair);
    const int m = static_cast<int>(pair.ground.size());
    if (k < 1 || k > m) throw std::invalid_argument("best_ranking_at_k: K out of range");
    const auto gr = descending_ranks(pair.ground);
    const auto pr = descending_ranks(pair.pred);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (pr[static_cast<size_t>(i)] < k) best = std::min(best, gr[static_cast<size_t>(i)]);
    return best / m;
}

namespace {

int fraction_to_k(const RankedPair& pair, double frac) {
    check_pair(pair);
    if (!(frac > 0.0) || frac > 1.0)
        throw std::invalid_argument("fractional K must be in (0, 1]");
    const int m = static_cast<int>(pair.ground.size());
    return std::max(1, static_cast<int>(std::llround(frac * m)));
}

}  // namespace

double precision_at_fraction(const RankedPair& pair, double frac) {
    return precision_at_k(pair, fraction_to_k(pair, frac));
}

double best_ranking_at_fraction(const RankedPair& pair, double frac) {
    return best_ranking_at_k(pair, fraction_to_k(pair, frac));
}

int sturges_bins(long n) {
    if (n < 2) throw std::invalid_argument("sturges_bins: need N >= 2");
    return static_cast<int>(std::llround(1.0 + 3.322 * std::log(static_cast<double>(n))));
}

std::vector<int> discretize(const std::vector<double>& v, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("discretize: n_bins must be >= 1");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : v)
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    std::vector<int> out(v.size());
    const double width = (hi - lo) / n_bins;
    for (size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            out[i] = n_bins;  // dedicated "invalid" bin keeps rows aligned
        } else if (!(width > 0)) {
            out[i] = 0;  // constant column collapses to one bin
        } else {
            int b = static_cast<int>((v[i] - lo) / width);
            out[i] = std::min(b, n_bins - 1);
        }
    }
    return out;
}

namespace {

struct Hash128 {
    size_t operator()(unsigned __int128 k) const {
        const uint64_t lo = static_cast<uint64_t>(k);
        const uint64_t hi = static_cast<uint64_t>(k >> 64);
        uint64_t h = lo * 0x9e3779b97f4a7c15ull;
        h ^= hi + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return static_cast<size_t>(h);
    }
};

// Duplicate columns do not change a joint distribution, but they do change the
// joint-key encoding and hence the floating-point accumulation order; dropping
// them keeps identities like H(y | S ∪ {z}) = H(y | S) for z ∈ S exact.
void push_unique(std::vector<const std::vector<int>*>& cols, const std::vector<int>* col) {
    for (const auto* c : cols)
        if (c == col || *c == *col) return;
    cols.push_back(col);
}

// Shannon entropy (bits) of the empirical joint over the given columns.
double joint_entropy(const std::vector<const std::vector<int>*>& cols, int base) {
    if (cols.empty()) return 0.0;
    const size_t n = cols[0]->size();
    std::unordered_map<unsigned __int128, long, Hash128> counts;
    counts.reserve(n * 2);
    for (size_t r = 0; r < n; ++r) {
        unsigned __int128 key = 0;
        for (const auto* c : cols) key = key * static_cast<unsigned>(base) + (*c)[r];
        ++counts[key];
    }
    double h = 0.0;
    const double dn = static_cast<double>(n);
    for (const auto& [key, c] : counts) {
        const double p = c / dn;
        h -= p * std::log2(p);
    }
    return h;
}

struct Discretized {
    std::vector<int> y;
    std::vector<std::vector<int>> z;
    int base = 0;
    int n_bins = 0;

    double h_cond(const std::vector<int>& subset) const {
        std::vector<const std::vector<int>*> cols;
        for (int j : subset) push_unique(cols, &z[static_cast<size_t>(j)]);
        const double hz = joint_entropy(cols, base);
        push_unique(cols, &y);
        // The difference of two entropies can round to a tiny negative; the
        // true value is bounded below by zero.
        return std::max(0.0, joint_entropy(cols, base) - hz);
    }
};

int resolve_bins(const BinSpec& bins, size_t n) {
    return bins.n_bins > 0 ? bins.n_bins : sturges_bins(static_cast<long>(n));
}

Discretized discretize_table(const TableColumns& tc, const BinSpec& bins) {
    Discretized d;
    d.n_bins = resolve_bins(bins, tc.y.size());
    d.base = d.n_bins + 1;
    d.y = discretize(tc.y, d.n_bins);
    for (const auto& col : tc.z) d.z.push_back(discretize(col, d.n_bins));
    return d;
}

}  // namespace

double conditional_entropy(const std::vector<double>& y,
                           const std::vector<std::vector<double>>& zs, const BinSpec& bins) {
    for (const auto& z : zs)
        if (z.size() != y.size()) throw std::invalid_argument("conditional_entropy: length mismatch");
    const int n_bins = resolve_bins(bins, y.size());
    const int base = n_bins + 1;
    std::vector<std::vector<int>> dz;
    for (const auto& z : zs) dz.push_back(discretize(z, n_bins));
    const std::vector<int> dy = discretize(y, n_bins);
    std::vector<const std::vector<int>*> cols;
    for (const auto& z : dz) push_unique(cols, &z);
    const double hz = joint_entropy(cols, base);
    push_unique(cols, &dy);
    return std::max(0.0, joint_entropy(cols, base) - hz);
}

double information_gain(const std::vector<double>& y,
                        const std::vector<std::vector<double>>& prefix,
                        const std::vector<double>& z_new, const BinSpec& bins) {
    std::vector<std::vector<double>> ext = prefix;
    ext.push_back(z_new);
    return std::max(0.0, conditional_entropy(y, prefix, bins) - conditional_entropy(y, ext, bins));
}

TableColumns table_columns(const ScoreTable& table) {
    TableColumns tc;
    tc.proxy_ids = table.proxy_ids;
    tc.z.resize(tc.proxy_ids.size());
    for (const Row& r : table.rows) {
        tc.y.push_back(r.val_acc);
        for (size_t p = 0; p < tc.proxy_ids.size(); ++p) {
            auto it = r.scores.find(tc.proxy_ids[p]);
            const bool ok = it != r.scores.end() && it->second.valid;
            tc.z[p].push_back(ok ? it->second.score : kNaN);
        }
    }
    return tc;
}

OrderingTrace ordering_random(const ScoreTable& table, int trials, uint64_t seed,
                              const BinSpec& bins) {
    const TableColumns tc = table_columns(table);
    const Discretized d = discretize_table(tc, bins);
    const int p = static_cast<int>(tc.proxy_ids.size());
    if (p < 1) throw std::invalid_argument("ordering: no proxy columns");
    OrderingTrace trace;
    trace.h.assign(static_cast<size_t>(p), 0.0);
    Rng rng(seed);
    std::vector<int> perm(static_cast<size_t>(p));
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < trials; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> subset;
        for (int k = 0; k < p; ++k) {
            subset.push_back(perm[static_cast<size_t>(k)]);
            trace.h[static_cast<size_t>(k)] += d.h_cond(subset);
        }
    }
    for (auto& h : trace.h) h /= trials;
    return trace;
}

OrderingTrace ordering_greedy(const ScoreTable& table, const BinSpec& bins) {
    const TableColumns tc = table_columns(table);
    const Discretized d = discretize_table(tc, bins);
    const int p = static_cast<int>(tc.proxy_ids.size());
    if (p < 1) throw std::invalid_argument("ordering: no proxy columns");
    OrderingTrace trace;
    std::vector<int> chosen;
    std::vector<bool> used(static_cast<size_t>(p), false);
    for (int k = 0; k < p; ++k) {
        int best = -1;
        double best_h = std::numeric_limits<double>::infinity();
        for (int j = 0; j < p; ++j) {
            if (used[static_cast<size_t>(j)]) continue;
            std::vector<int> cand = chosen;
            cand.push_back(j);
            const double h = d.h_cond(cand);
            if (h < best_h) {
                best_h = h;
                best = j;
            }
        }
        used[static_cast<size_t>(best)] = true;
        chosen.push_back(best);
        trace.h.push_back(best_h);
        std::vector<std::string> names;
        for (int j : chosen) names.push_back(tc.proxy_ids[static_cast<size_t>(j)]);
        trace.chosen.push_back(std::move(names));
    }
    return trace;
}

OrderingTrace ordering_exhaustive(const ScoreTable& table, int k_max, const BinSpec& bins) {
    const TableColumns tc = table_columns(table);
    const Discretized d = discretize_table(tc, bins);
    const int p = static_cast<int>(tc.proxy_ids.size());
    if (p < 1) throw std::invalid_argument("ordering: no proxy columns");
    k_max = std::min(k_max, p);

    double total = 0;
    for (int k = 1; k <= k_max; ++k) {
        double c = 1;
        for (int i = 0; i < k; ++i) c = c * (p - i) / (i + 1);
        total += c;
    }
    if (total > 1e6)
        throw std::invalid_argument(
            "ordering_exhaustive: subset budget exceeded; reduce k_max (" +
            std::to_string(static_cast<long>(total)) + " subsets > 1e6)");

    OrderingTrace trace;
    for (int k = 1; k <= k_max; ++k) {
        std::vector<int> idx(static_cast<size_t>(k));
        std::iota(idx.begin(), idx.end(), 0);
        double best_h = std::numeric_limits<double>::infinity();
        std::vector<int> best_subset;
        while (true) {
            const double h = d.h_cond(idx);
            if (h < best_h) {
                best_h = h;
                best_subset = idx;
            }
            // next combination
            int i = k - 1;
            while (i >= 0 && idx[static_cast<size_t>(i)] == p - k + i) --i;
            if (i < 0) break;
            ++idx[static_cast<size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
        }
        trace.h.push_back(best_h);
        std::vector<std::string> names;
        for (int j : best_subset) names.push_back(tc.proxy_ids[static_cast<size_t>(j)]);
        trace.chosen.push_back(std::move(names));
    }
    return trace;
}

namespace {

std::vector<size_t> sample_rows(size_t n, size_t want, uint64_t seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    if (want >= n) return idx;
    Rng rng(seed);
    for (size_t i = 0; i < want; ++i) {
        std::uniform_int_distribution<size_t> d(i, n - 1);
        std::swap(idx[i], idx[d(rng)]);
    }
    idx.resize(want);
    return idx;
}

std::string table_label(const ScoreTable& t) {
    return t.task.empty() ? t.benchmark : t.benchmark + "/" + t.task;
}

// Per-proxy correlation-style metric against val_acc on a seeded sample.
Matrix metric_matrix(const std::vector<ScoreTable>& tables, uint64_t seed,
                     const std::function<double(const RankedPair&)>& metric) {
    Matrix m;
    m.row_names = proxy_catalog();
    for (const auto& t : tables) m.col_names.push_back(table_label(t));
    m.values.assign(m.row_names.size(), std::vector<double>(tables.size(), kNaN));
    for (size_t ti = 0; ti < tables.size(); ++ti) {
        const auto& t = tables[ti];
        const auto rows = sample_rows(t.rows.size(), 1000, seed);
        for (size_t pi = 0; pi < m.row_names.size(); ++pi) {
            RankedPair pair;
            for (size_t r : rows) {
                auto it = t.rows[r].scores.find(m.row_names[pi]);
                if (it == t.rows[r].scores.end() || !it->second.valid) continue;
                pair.ground.push_back(t.rows[r].val_acc);
                pair.pred.push_back(it->second.score);
            }
            if (pair.ground.size() < 3) continue;  // stays missing
            try {
                m.values[pi][ti] = metric(pair);
            } catch (const std::exception&) {
                // constant column: stays missing
            }
        }
    }
    // Order rows by mean metric value.
    std::vector<size_t> order(m.row_names.size());
    std::iota(order.begin(), order.end(), size_t{0});
    auto row_mean = [&](size_t i) {
        double s = 0;
        int c = 0;
        for (double v : m.values[i])
            if (std::isfinite(v)) {
                s += v;
                ++c;
            }
        return c ? s / c : -std::numeric_limits<double>::infinity();
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return row_mean(a) > row_mean(b); });
    Matrix sorted;
    sorted.col_names = m.col_names;
    for (size_t i : order) {
        sorted.row_names.push_back(m.row_names[i]);
        sorted.values.push_back(m.values[i]);
    }
    return sorted;
}

}  // namespace

Matrix generalization_matrix(const std::vector<ScoreTable>& tables, uint64_t seed) {
    return metric_matrix(tables, seed, [](const RankedPair& p) { return spearman(p); });
}

Matrix precision_matrix(const std::vector<ScoreTable>& tables, int k, uint64_t seed) {
    return metric_matrix(tables, seed,
                         [k](const RankedPair& p) { return precision_at_k(p, k); });
}

Matrix best_ranking_matrix(const std::vector<ScoreTable>& tables, int k, uint64_t seed) {
    return metric_matrix(tables, seed,
                         [k](const RankedPair& p) { return best_ranking_at_k(p, k); });
}

Matrix cross_benchmark_correlation(const std::vector<ScoreTable>& tables) {
    if (tables.size() < 2)
        throw std::invalid_argument("cross_benchmark_correlation: need >= 2 tables");
    const size_t nt = tables.size();

    std::vector<std::string> shared;
    for (const auto& p : proxy_catalog()) {
        bool in_all = true;
        for (const auto& t : tables)
            in_all &= std::find(t.proxy_ids.begin(), t.proxy_ids.end(), p) != t.proxy_ids.end();
        if (in_all) shared.push_back(p);
    }
    if (shared.empty())
        throw std::invalid_argument("cross_benchmark_correlation: no common proxies");

    Matrix m;
    for (const auto& t : tables) m.col_names.push_back(table_label(t));
    m.row_names = m.col_names;
    m.values.assign(nt, std::vector<double>(nt, kNaN));

    for (size_t a = 0; a < nt; ++a) {
        m.values[a][a] = 1.0;
        for (size_t b = a + 1; b < nt; ++b) {
            // Align by shared arch ids when the spaces overlap.
            std::vector<std::pair<const Row*, const Row*>> aligned;
            for (const auto& r : tables[a].rows)
                if (tables[b].has_row(r.id)) aligned.emplace_back(&r, &tables[b].row(r.id));
            double acc = 0;
            int cnt = 0;
            if (aligned.size() >= 10) {
                for (const auto& p : shared) {
                    std::vector<double> xa, xb;
                    for (const auto& [ra, rb] : aligned) {
                        auto ia = ra->scores.find(p), ib = rb->scores.find(p);
                        if (ia == ra->scores.end() || ib == rb->scores.end()) continue;
                        if (!ia->second.valid || !ib->second.valid) continue;
                        xa.push_back(ia->second.score);
                        xb.push_back(ib->second.score);
                    }
                    if (xa.size() < 3) continue;
                    try {
                        acc += pearson(xa, xb);
                        ++cnt;
                    } catch (const std::exception&) {
                    }
                }
            } else {
                // Disjoint spaces: correlate per-proxy generalization profiles.
                Matrix g = generalization_matrix({tables[a], tables[b]});
                std::vector<double> xa, xb;
                for (size_t i = 0; i < g.row_names.size(); ++i)
                    if (std::isfinite(g.values[i][0]) && std::isfinite(g.values[i][1])) {
                        xa.push_back(g.values[i][0]);
                        xb.push_back(g.values[i][1]);
                    }
                if (xa.size() >= 3) {
                    try {
                        acc += pearson(xa, xb);
                        ++cnt;
                    } catch (const std::exception&) {
                    }
                }
            }
            if (cnt) m.values[a][b] = m.values[b][a] = acc / cnt;
        }
    }

    // Order benchmarks by mean correlation.
    std::vector<size_t> order(nt);
    std::iota(order.begin(), order.end(), size_t{0});
    auto mean_of = [&](size_t i) {
        double s = 0;
        int c = 0;
        for (double v : m.values[i])
            if (std::isfinite(v)) {
                s += v;
                ++c;
            }
        return c ? s / c : 0.0;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return mean_of(a) > mean_of(b); });
    Matrix sorted;
    for (size_t i : order) sorted.row_names.push_back(m.row_names[i]);
    sorted.col_names = sorted.row_names;
    for (size_t i : order) {
        std::vector<double> row;
        for (size_t j : order) row.push_back(m.values[i][j]);
        sorted.values.push_back(std::move(row));
    }
    return sorted;
}

EntropyReport entropy_report(const ScoreTable& table, const BinSpec& bins) {
    const TableColumns tc = table_columns(table);
    const Discretized d = discretize_table(tc, bins);
    EntropyReport rep;
    rep.proxy_ids = tc.proxy_ids;
    rep.n_bins = d.n_bins;
    rep.sample_size = static_cast<long>(tc.y.size());
    rep.h_y = d.h_cond({});
    const int p = static_cast<int>(tc.proxy_ids.size());
    for (int j = 0; j < p; ++j) {
        const double h = d.h_cond({j});
        rep.h_y_given_z.push_back(h);
        rep.info_gain.push_back(rep.h_y - h);
    }
    rep.ig_pairs.assign(static_cast<size_t>(p), std::vector<double>(static_cast<size_t>(p), 0.0));
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;  // diagonal stays 0
            rep.ig_pairs[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                rep.h_y_given_z[static_cast<size_t>(i)] - d.h_cond({i, j});
        }
    return rep;
}

double rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2) throw std::invalid_argument("rank_sum_p: need >= 2 per group");
    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    const auto ranks = descending_ranks(all);
    double ra = 0;
    for (size_t i = 0; i < na; ++i) ra += ranks[i] + 1.0;  // 1-based rank sum
    const double n = static_cast<double>(na + nb);
    const double u = ra - static_cast<double>(na) * (na + 1) / 2.0;
    const double mu = static_cast<double>(na) * nb / 2.0;
    // Tie correction on the variance.
    std::vector<double> sorted(all);
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    const double var = static_cast<double>(na) * nb / 12.0 *
                       ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0) return 1.0;
    const double z = std::abs(u - mu) / std::sqrt(var);
    return std::erfc(z / std::sqrt(2.0));
}

}  // namespace zcgauge::analysis
