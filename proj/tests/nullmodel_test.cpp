#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "phonet/nullmodel.hpp"
#include "stats_support.hpp"

using namespace phonet;

namespace {

NullModelConfig config(std::vector<std::size_t> f, std::size_t n_languages, std::uint64_t seed) {
    NullModelConfig c;
    c.seed = seed;
    c.source_frequencies = std::move(f);
    c.n_languages = n_languages;
    return c;
}

std::vector<Consonant> plain_consonants(std::size_t n) {
    std::vector<Consonant> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({i, "c" + std::to_string(i), {i % 2 == 0}});
    return out;
}

const FeatureCatalog one_feature{{"f"}};

} // namespace

TEST(RandomStream, EngineIsStandardMt19937_64) {
    // The standard fixes the 10000th output of a default-seeded mt19937_64.
    RandomStream r(5489u);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i)
        x = r.next();
    EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(RandomStream, DerivedDrawsStayInRange) {
    RandomStream r(3);
    for (int i = 0; i < 10000; ++i) {
        EXPECT_LT(r.below(7), 7u);
        const double u = r.unit();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_EQ(r.below(1), 0u);
    const auto s = r.sample_without_replacement(50, 50);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 50u);
    EXPECT_TRUE(r.sample_without_replacement(5, 0).empty());
}

TEST(RandomStream, SubSeedsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t m : {0ull, 1ull, 2ull})
        for (std::uint64_t i = 0; i < 100; ++i)
            seen.insert(replicate_seed(m, i));
    EXPECT_EQ(seen.size(), 300u);
}

TEST(NullModel, ForcedSaturation) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = generate_random_corpus(config({2}, 2, seed), one_feature, plain_consonants(1));
        EXPECT_EQ(c.languages[0].inventory, std::vector<std::size_t>{0});
        EXPECT_EQ(c.languages[1].inventory, std::vector<std::size_t>{0});
    }
}

TEST(NullModel, PlacementIsUniform) {
    const std::size_t nl = 317, draws = 10000;
    std::vector<double> counts(nl, 0.0);
    for (std::uint64_t seed = 0; seed < draws; ++seed) {
        const auto c = generate_random_corpus(config({1}, nl, seed), one_feature, plain_consonants(1));
        for (std::size_t l = 0; l < nl; ++l)
            counts[l] += static_cast<double>(c.languages[l].inventory.size());
    }
    const double e = static_cast<double>(draws) / nl;
    double chi2 = 0.0;
    for (double o : counts)
        chi2 += (o - e) * (o - e) / e;
    EXPECT_GT(testing_support::chi_square_p(chi2, static_cast<double>(nl - 1)), 0.001) << "chi2 " << chi2;
}

TEST(NullModel, FrequenciesPreservedExactly) {
    const auto base = synthesize_corpus({25, 60, 5, FrequencyProfile::geometric(0.9, 0.95), 0.5, 4});
    const auto cfg = NullModelConfig::from_corpus(base, 17, 30);
    for (std::size_t i = 0; i < cfg.n_replicates; ++i) {
        const auto r = generate_replicate(cfg, base, i);
        EXPECT_EQ(consonant_frequencies(r), consonant_frequencies(base));
        EXPECT_EQ(r.languages.size(), base.languages.size());
        EXPECT_EQ(r.consonants, base.consonants);
    }
}

// Shared-language count of consonants i and j is hypergeometric with mean
// f_i f_j / L and variance f_j (f_i/L)(1 - f_i/L)(L - f_j)/(L - 1).
TEST(NullModel, ExpectedCooccurrence) {
    const std::size_t nl = 20, reps = 200;
    const std::vector<std::size_t> f{18, 15, 12, 10, 8, 5, 3, 1};
    const auto cons = plain_consonants(f.size());
    DenseMatrix<double> sum(f.size(), f.size());
    for (std::size_t r = 0; r < reps; ++r) {
        const auto c = generate_random_corpus(config(f, nl, replicate_seed(99, r)), one_feature, cons);
        const auto b = project_phonet(build_bipartite(c));
        for (std::size_t i = 0; i < f.size(); ++i)
            for (std::size_t j = 0; j < f.size(); ++j)
                sum(i, j) += static_cast<double>(b.weights(i, j));
    }
    const double L = nl;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j) {
            const double fi = f[i], fj = f[j];
            const double mean = fi * fj / L;
            const double var = fj * (fi / L) * (1 - fi / L) * (L - fj) / (L - 1);
            EXPECT_NEAR(sum(i, j) / reps, mean, 3 * std::sqrt(var / reps) + 1e-12) << i << "," << j;
        }
}

TEST(NullModel, DeterministicPerSeed) {
    const auto base = synthesize_corpus({12, 20, 3, FrequencyProfile::uniform(0.5), 0.5, 2});
    const auto cfg = NullModelConfig::from_corpus(base, 5, 3);
    EXPECT_EQ(generate_replicate(cfg, base, 1), generate_replicate(cfg, base, 1));
    EXPECT_NE(generate_replicate(cfg, base, 0), generate_replicate(cfg, base, 1));
    auto other = cfg;
    other.seed = 6;
    EXPECT_NE(generate_replicate(cfg, base, 0), generate_replicate(other, base, 0));
}

TEST(NullModel, Errors) {
    EXPECT_THROW(generate_random_corpus(config({3}, 2, 1), one_feature, plain_consonants(1)), ValidationError);
    EXPECT_THROW(generate_random_corpus(config({1}, 0, 1), one_feature, plain_consonants(1)), ValidationError);
    EXPECT_THROW(generate_random_corpus(config({1, 1}, 2, 1), one_feature, plain_consonants(1)), ValidationError);
}

TEST(NullModel, EmptyLanguagesKept) {
    const auto c = generate_random_corpus(config({1}, 6, 1), one_feature, plain_consonants(1));
    EXPECT_EQ(c.languages.size(), 6u);
    std::size_t empty = 0;
    for (const auto& l : c.languages)
        empty += l.inventory.empty();
    EXPECT_EQ(empty, 5u);
}

TEST(ControlReport, StructureAndSeeds) {
    const auto base = synthesize_corpus({20, 30, 5, FrequencyProfile::geometric(0.95, 0.9), 0.5, 8});
    const auto cfg = NullModelConfig::from_corpus(base, 21, 4);
    ExperimentParams p;
    p.min_freq = 2;
    const auto r = control_report(cfg, base, p);
    EXPECT_EQ(r.observed.name, "observed");
    ASSERT_EQ(r.replicates.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(r.replicates[i].seed, replicate_seed(21, i));
        ASSERT_EQ(r.replicates[i].eigvecs.size(), 2u);
        EXPECT_EQ(r.replicates[i].eigvecs[0].eigvec_index, 1u);
        ASSERT_TRUE(r.replicates[i].first_correlation.has_value());
    }
    const auto again = control_report(cfg, base, p);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(again.replicates[i].first_correlation, r.replicates[i].first_correlation);
        EXPECT_EQ(again.replicates[i].eigvecs[0].tree_error, r.replicates[i].eigvecs[0].tree_error);
    }
}

TEST(Aggregate, MeanAndSampleSd) {
    const auto a = aggregate({1, 2, 3, 4});
    EXPECT_EQ(a.n, 4u);
    EXPECT_DOUBLE_EQ(a.mean, 2.5);
    EXPECT_DOUBLE_EQ(a.sd, std::sqrt(5.0 / 3.0));
    EXPECT_EQ(aggregate({}).n, 0u);
    EXPECT_EQ(aggregate({7}).sd, 0.0);
}
