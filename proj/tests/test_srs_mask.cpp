// Comb allocation, user sub-masks and extra test-time masking.

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace srsdi;

TEST(Comb, EveryFourthTone) {
    const Mask m = comb_mask(32, 4, 0, 2);
    const std::vector<std::size_t> expect{0, 4, 8, 12, 16, 20, 24, 28};
    EXPECT_EQ(m.active_subcarriers(), expect);
    EXPECT_EQ(m.count(), 16u);
}

TEST(Comb, OffsetShifts) {
    const std::vector<std::size_t> expect{1, 5, 9, 13, 17, 21, 25, 29};
    EXPECT_EQ(comb_mask(32, 4, 1, 1).active_subcarriers(), expect);
}

TEST(Comb, CombOneIsAllOnes) { EXPECT_EQ(comb_mask(16, 1, 0, 3).count(), 48u); }

TEST(Comb, InvalidArguments) {
    EXPECT_THROW(comb_mask(32, 4, 4, 1), ParameterError);
    EXPECT_THROW(comb_mask(32, 0, 0, 1), ParameterError);
    EXPECT_THROW(comb_mask(4, 5, 0, 1), ParameterError);
}

TEST(UserSubmasks, FourUsersTwoTonesEach) {
    const Mask base = comb_mask(32, 4, 0, 2);
    const auto users = user_submasks(base, 4, 0.25, 11);
    ASSERT_EQ(users.size(), 4u);
    Mask uni(32, 2);
    for (std::size_t i = 0; i < users.size(); ++i) {
        EXPECT_EQ(users[i].active_subcarriers().size(), 2u);
        EXPECT_TRUE(users[i].subset_of(base));
        for (std::size_t j = i + 1; j < users.size(); ++j) EXPECT_EQ((users[i] & users[j]).count(), 0u);
        uni = uni | users[i];
    }
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(uni[i], base[i]);
}

TEST(UserSubmasks, SingleUserFullKeepIsIdentity) {
    const Mask base = comb_mask(32, 4, 2, 3);
    const auto u = user_submasks(base, 1, 1.0, 5);
    ASSERT_EQ(u.size(), 1u);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(u[0][i], base[i]);
}

TEST(UserSubmasks, InfeasibleAndDeterministic) {
    const Mask base = comb_mask(32, 2, 0, 1);
    EXPECT_THROW(user_submasks(base, 3, 0.5, 1), ParameterError);
    const auto a = user_submasks(base, 3, 0.3, 8), b = user_submasks(base, 3, 0.3, 8);
    for (std::size_t u = 0; u < 3; ++u) {
        EXPECT_EQ(a[u].active_subcarriers(), b[u].active_subcarriers());
        EXPECT_EQ(a[u].active_subcarriers().size(), 4u);  // floor(0.3 * 16)
    }
}

TEST(ExtraMask, ZeroIsNoOp) {
    const Mask base = comb_mask(32, 2, 0, 4);
    const Mask m = additional_mask(base, 0.0, ExtraMaskMode::subcarrier_and_antenna, 3);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(m[i], base[i]);
}

TEST(ExtraMask, SubcarrierOnlyHalf) {
    const Mask m = additional_mask(Mask::ones(32, 4), 50.0, ExtraMaskMode::subcarrier_only, 4);
    EXPECT_EQ(m.active_subcarriers().size(), 16u);
    EXPECT_EQ(m.count(), 64u);
    for (std::size_t k = 0; k < 32; ++k)
        for (std::size_t a = 1; a < 4; ++a) EXPECT_EQ(m(k, a), m(k, 0));
}

TEST(ExtraMask, PixelHalf) {
    const Mask m = additional_mask(Mask::ones(32, 4), 50.0, ExtraMaskMode::subcarrier_and_antenna, 4);
    EXPECT_EQ(m.count(), 64u);
}

// Property: exact counts and containment over many (r, seed) pairs.
TEST(ExtraMask, CountsAreExactProperty) {
    const Mask base = user_submasks(comb_mask(64, 2, 1, 8), 2, 0.5, 2)[0];
    const std::size_t tones = base.active_subcarriers().size(), pixels = base.count();
    for (double r : {5.0, 12.5, 33.0, 50.0, 99.0, 100.0})
        for (std::uint64_t s = 0; s < 10; ++s) {
            const Mask a = additional_mask(base, r, ExtraMaskMode::subcarrier_only, s);
            const Mask b = additional_mask(base, r, ExtraMaskMode::subcarrier_and_antenna, s);
            EXPECT_TRUE(a.subset_of(base));
            EXPECT_TRUE(b.subset_of(base));
            EXPECT_EQ(a.active_subcarriers().size(), tones - floor_count(r / 100.0, tones));
            EXPECT_EQ(b.count(), pixels - floor_count(r / 100.0, pixels));
        }
    EXPECT_THROW(additional_mask(base, 101.0, ExtraMaskMode::subcarrier_only, 1), ParameterError);
}

TEST(TrainingSampler, DrawsOneOfThePartition) {
    const TrainingMaskSampler s(comb_mask(64, 1, 0, 8), 0.75, 9);
    ASSERT_EQ(s.masks().size(), 4u);
    Rng rng = make_rng(1);
    for (int i = 0; i < 20; ++i) {
        const Mask& m = s.draw(rng);
        EXPECT_EQ(m.active_subcarriers().size(), 16u);
    }
    EXPECT_THROW(TrainingMaskSampler(comb_mask(8, 1, 0, 1), 1.0, 1), ParameterError);
}
