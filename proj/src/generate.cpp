#include "tkeig/generate.hpp"

#include "tkeig/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace tkeig {

namespace {

CsrMatrix scaled(const CsrMatrix& m, double factor)
{
    std::vector<double> values(m.values().begin(), m.values().end());
    for (auto& v : values) {
        v *= factor;
    }
    return CsrMatrix(m.num_rows(), m.num_cols(), {m.row_offsets().begin(), m.row_offsets().end()},
                     {m.col_indices().begin(), m.col_indices().end()}, std::move(values));
}

} // namespace

CsrMatrix random_symmetric(std::size_t n, double density, std::uint64_t seed, std::optional<double> norm_one_target)
{
    if (n == 0 || !(density > 0.0) || density > 1.0) {
        throw InvalidConfigError("random_symmetric: need n >= 1 and density in (0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> index(0, n - 1);

    CooMatrix coo;
    coo.num_rows = n;
    coo.num_cols = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (coin(rng) < density) {
            coo.entries.push_back({static_cast<index_t>(i), static_cast<index_t>(i), value(rng)});
        }
    }
    const auto pairs = static_cast<std::size_t>(std::llround(density * static_cast<double>(n) * static_cast<double>(n - 1) / 2.0));
    std::unordered_set<std::uint64_t> taken;
    while (taken.size() < pairs) {
        auto i = index(rng);
        auto j = index(rng);
        if (i == j) {
            continue;
        }
        if (i > j) {
            std::swap(i, j);
        }
        if (!taken.insert(static_cast<std::uint64_t>(i) * n + j).second) {
            continue;
        }
        const double v = value(rng);
        coo.entries.push_back({static_cast<index_t>(i), static_cast<index_t>(j), v});
        coo.entries.push_back({static_cast<index_t>(j), static_cast<index_t>(i), v});
    }
    auto m = coo_to_csr(coo);
    if (norm_one_target) {
        const double norm = norm_one(m);
        if (norm > 0.0) {
            m = scaled(m, *norm_one_target / norm);
        }
    }
    return m;
}

CsrMatrix ill_conditioned(std::size_t n, double spread, double coupling, double density, std::uint64_t seed)
{
    if (n < 2 || !(spread >= 1.0) || !(coupling >= 0.0) || coupling >= 1.0) {
        throw InvalidConfigError("ill_conditioned: need n >= 2, spread >= 1 and 0 <= coupling < 1");
    }
    const auto r = random_symmetric(n, density, seed, 1.0);
    std::vector<double> sqrt_d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        sqrt_d[i] = std::sqrt(std::pow(spread, t));
    }
    CooMatrix coo;
    coo.num_rows = n;
    coo.num_cols = n;
    for (std::size_t i = 0; i < n; ++i) {
        coo.entries.push_back({static_cast<index_t>(i), static_cast<index_t>(i), sqrt_d[i] * sqrt_d[i]});
        for (auto k = r.row_offsets()[i]; k < r.row_offsets()[i + 1]; ++k) {
            const auto j = r.col_indices()[k];
            coo.entries.push_back({static_cast<index_t>(i), j, coupling * r.values()[k] * (sqrt_d[i] * sqrt_d[j])});
        }
    }
    return coo_to_csr(coo);
}

CsrMatrix synthetic_large(std::size_t n, std::uint64_t seed)
{
    if (n < 24 || n % 2 != 0) {
        throw InvalidConfigError("synthetic_large: n must be even and at least 24");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    // Offsets below n / 2 keep every pair unique: {i, i + d} and
    // {j, j + d'} coincide only if d + d' = n.
    std::uniform_int_distribution<std::size_t> offset(1, n / 2 - 1);

    CooMatrix coo;
    coo.num_rows = n;
    coo.num_cols = n;
    coo.entries.reserve(n + 9 * n);
    std::vector<std::size_t> picked;
    std::vector<std::size_t> diagonal_at(n);
    for (std::size_t i = 0; i < n; ++i) {
        diagonal_at[i] = coo.entries.size();
        coo.entries.push_back({static_cast<index_t>(i), static_cast<index_t>(i), value(rng)});
        const std::size_t count = i % 2 == 0 ? 4 : 5;
        picked.clear();
        while (picked.size() < count) {
            const auto d = offset(rng);
            if (std::find(picked.begin(), picked.end(), d) == picked.end()) {
                picked.push_back(d);
            }
        }
        for (const auto d : picked) {
            const auto j = static_cast<index_t>((i + d) % n);
            const double v = value(rng) / 3.0;
            coo.entries.push_back({static_cast<index_t>(i), j, v});
            coo.entries.push_back({j, static_cast<index_t>(i), v});
        }
    }
    // Spikes: diagonal entries 30, 28, 26, ... on random rows.
    std::uniform_int_distribution<std::size_t> row(0, n - 1);
    std::vector<std::size_t> spikes;
    while (spikes.size() < 12) {
        const auto r = row(rng);
        if (std::find(spikes.begin(), spikes.end(), r) == spikes.end()) {
            spikes.push_back(r);
        }
    }
    for (std::size_t t = 0; t < spikes.size(); ++t) {
        coo.entries[diagonal_at[spikes[t]]].value = 30.0 - 2.0 * static_cast<double>(t);
    }
    return coo_to_csr(coo);
}

} // namespace tkeig
