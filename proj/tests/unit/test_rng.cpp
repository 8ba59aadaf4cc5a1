#include <gtest/gtest.h>

#include "cqrlab/rng.hpp"

namespace cqrlab {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformRange) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const int k = r.index(7);
    ASSERT_GE(k, 0);
    ASSERT_LT(k, 7);
  }
}

TEST(DeriveSeed, DistinctAcrossStreamsAndIndices) {
  EXPECT_NE(derive_seed(1, streams::kEnvTrain), derive_seed(1, streams::kEnvEval));
  EXPECT_NE(derive_seed(1, streams::kEnvEval, 0), derive_seed(1, streams::kEnvEval, 1));
  EXPECT_NE(derive_seed(1, streams::kInit), derive_seed(2, streams::kInit));
  EXPECT_EQ(derive_seed(7, "batch", 3), derive_seed(7, "batch", 3));
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(SeedBook, RecordsTouchedStreams) {
  SeedBook book(5);
  EXPECT_TRUE(book.touched().empty());
  EXPECT_EQ(book.seed(streams::kInit), derive_seed(5, streams::kInit));
  book.rng(streams::kBatch);
  EXPECT_TRUE(book.touched(streams::kInit));
  EXPECT_TRUE(book.touched(streams::kBatch));
  EXPECT_FALSE(book.touched(streams::kEnvTrain));
  EXPECT_EQ(book.touched().size(), 2u);
  book.clear_record();
  EXPECT_TRUE(book.touched().empty());
}

}  // namespace
}  // namespace cqrlab
