#include <gtest/gtest.h>

#include "stapcov/estimators.hpp"
#include "stapcov/simulator.hpp"

using namespace stapcov;

TEST(Rng, SplitMixReferenceOutput) {
    std::uint64_t state = 0;
    EXPECT_EQ(splitmix64(state), 0xe220a8397b1dcdafULL);
}

TEST(Rng, XoshiroReferenceStream) {
    // Reference values from an independent Python implementation of the published algorithm.
    Xoshiro256 rng(12345);
    EXPECT_EQ(rng(), 0xbe6a36374160d49bULL);
    EXPECT_EQ(rng(), 0x214aaa0637a688c6ULL);
    EXPECT_EQ(rng(), 0xf69d16de9954d388ULL);
    EXPECT_EQ(derive_seed(7, 0), 0xd11f5a75f7215b2aULL);
}

TEST(Rng, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(ComplexGaussian, Moments) {
    Xoshiro256 rng(2024);
    constexpr int kDraws = 1000000;
    const CVector z = complex_gaussian_vector(kDraws, rng);
    const cdouble mean = z.mean();
    EXPECT_LT(std::abs(mean.real()), 0.01);
    EXPECT_LT(std::abs(mean.imag()), 0.01);
    const double power = z.squaredNorm() / kDraws;
    EXPECT_GE(power, 0.99);
    EXPECT_LE(power, 1.01);
    double re2 = 0.0, im2 = 0.0;
    cdouble pseudo = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        re2 += z(i).real() * z(i).real();
        im2 += z(i).imag() * z(i).imag();
        pseudo += z(i) * z(i);
    }
    EXPECT_NEAR(re2 / kDraws, 0.5, 0.005);
    EXPECT_NEAR(im2 / kDraws, 0.5, 0.005);
    EXPECT_LT(std::abs(pseudo) / kDraws, 0.01);
}

TEST(ComplexGaussian, Deterministic) {
    Xoshiro256 a(5), b(5);
    EXPECT_EQ(complex_gaussian_vector(64, a), complex_gaussian_vector(64, b));
    EXPECT_THROW(complex_gaussian_vector(0, a), Error);
}

TEST(Snapshots, ShapeAndEmpty) {
    const RadarConfig cfg;
    const SnapshotSet empty = generate_snapshots(cfg, 0, 1);
    EXPECT_EQ(empty.count(), 0);
    EXPECT_EQ(empty.dimension(), 64);
    const SnapshotSet one = generate_snapshots(cfg, 3, 1, GenerationMode::patch_sum);
    EXPECT_EQ(one.count(), 3);
    EXPECT_EQ(one.dimension(), 64);
    EXPECT_THROW(generate_snapshots(cfg, -1, 1), Error);
}

TEST(Snapshots, DeterministicPerSeed) {
    const RadarConfig cfg;
    for (auto mode : {GenerationMode::coloring, GenerationMode::patch_sum}) {
        const auto a = generate_snapshots(cfg, 20, 77, mode);
        const auto b = generate_snapshots(cfg, 20, 77, mode);
        const auto c = generate_snapshots(cfg, 20, 78, mode);
        EXPECT_EQ(a.X, b.X);
        EXPECT_NE(a.X, c.X);
    }
}

TEST(Snapshots, PrefixProperty) {
    // Snapshot-major draw order: fewer snapshots from the same seed are a prefix.
    const RadarConfig cfg;
    for (auto mode : {GenerationMode::coloring, GenerationMode::patch_sum}) {
        const auto small = generate_snapshots(cfg, 5, 3, mode);
        const auto large = generate_snapshots(cfg, 1500, 3, mode);
        EXPECT_LT((large.X.leftCols(5) - small.X).norm(), 1e-9 * small.X.norm());
    }
}

TEST(Snapshots, NoiseOnlyScmApproachesIdentity) {
    RadarConfig cfg;
    cfg.velocity = 0.0;
    cfg.cnr_db = -std::numeric_limits<double>::infinity();
    const auto data = generate_snapshots(cfg, 20000, 11);
    const CMatrix r = scm(data).R;
    EXPECT_LT(relative_frobenius(r, CMatrix::Identity(64, 64)), 0.1);
}

class ModeConvergence : public ::testing::TestWithParam<GenerationMode> {};

TEST_P(ModeConvergence, ScmMatchesClairvoyantAndIsCircular) {
    const RadarConfig cfg;
    const CMatrix truth = clairvoyant_ccm(cfg);
    const auto data = generate_snapshots(cfg, 100000, 19, GetParam());
    const CMatrix r = scm(data).R;
    EXPECT_LT(relative_frobenius(r, truth), 0.05);
    const CMatrix pseudo = data.X * data.X.transpose() / static_cast<double>(data.count());
    EXPECT_LT(pseudo.norm() / truth.norm(), 0.05);
}

INSTANTIATE_TEST_SUITE_P(BothModes, ModeConvergence,
                         ::testing::Values(GenerationMode::coloring, GenerationMode::patch_sum),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Snapshots, ModesAgreeWithEachOther) {
    const RadarConfig cfg;
    const CMatrix a = scm(generate_snapshots(cfg, 100000, 23, GenerationMode::coloring)).R;
    const CMatrix b = scm(generate_snapshots(cfg, 100000, 29, GenerationMode::patch_sum)).R;
    EXPECT_LT(relative_frobenius(a, b), 0.05);
}

TEST(Snapshots, ParseMode) {
    EXPECT_EQ(parse_generation_mode("coloring"), GenerationMode::coloring);
    EXPECT_EQ(parse_generation_mode("patch_sum"), GenerationMode::patch_sum);
    EXPECT_THROW(parse_generation_mode("fft"), Error);
}
