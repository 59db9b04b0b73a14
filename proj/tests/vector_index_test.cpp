// Copyright 2026 The kurag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "kurag/vector_index.hpp"
#include "test_support.hpp"

namespace kurag {
namespace {

TEST(VectorIndexTest, InsertIntoEmpty) {
  VectorIndex index(4);
  index.insert({0, Embedding::unit({1, 0, 0, 0})});
  EXPECT_EQ(index.size(), 1u);
}

TEST(VectorIndexTest, WrongDimensionIsRejected) {
  VectorIndex index(4);
  EXPECT_THROW(index.insert({0, Embedding::unit({1, 0, 0})}), DimensionError);
  index.insert({0, Embedding::unit({1, 0, 0, 0})});
  EXPECT_THROW(index.search_topk(Embedding::unit({1, 0}), 1), DimensionError);
}

TEST(VectorIndexTest, DuplicateIdConflicts) {
  VectorIndex index(2);
  index.insert({5, Embedding::unit({1, 0})});
  EXPECT_THROW(index.insert({5, Embedding::unit({0, 1})}), ConflictError);
}

TEST(VectorIndexTest, ThousandRandomVectorsReadBack) {
  std::mt19937_64 rng(1);
  VectorIndex index(16);
  std::vector<Embedding> vs;
  for (int i = 0; i < 1000; ++i) {
    vs.push_back(testing_support::random_unit(16, rng));
    index.insert({i, vs.back()});
  }
  for (int i = 0; i < 1000; ++i) {
    auto got = index.get(i);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(got->values, vs[i].values);
  }
}

TEST(VectorIndexTest, SelfSimilarityRanksFirst) {
  std::mt19937_64 rng(2);
  VectorIndex index(32);
  std::vector<Embedding> vs;
  for (int i = 0; i < 50; ++i) {
    vs.push_back(testing_support::random_unit(32, rng));
    index.insert({i, vs.back()});
  }
  auto hits = index.search_topk(vs[17], 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].entry_id, 17);
  EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
}

TEST(VectorIndexTest, KLargerThanSizeReturnsAll) {
  VectorIndex index(2);
  index.insert({1, Embedding::unit({1, 0})});
  index.insert({2, Embedding::unit({0, 1})});
  EXPECT_EQ(index.search_topk(Embedding::unit({1, 1}), 10).size(), 2u);
  VectorIndex empty(2);
  EXPECT_TRUE(empty.search_topk(Embedding::unit({1, 1}), 3).empty());
  EXPECT_THROW(index.search_topk(Embedding::unit({1, 1}), 0), ValidationError);
}

TEST(VectorIndexTest, TiesBreakByAscendingId) {
  VectorIndex index(2);
  index.insert({9, Embedding::unit({1, 0})});
  index.insert({3, Embedding::unit({1, 0})});
  index.insert({5, Embedding::unit({0, 1})});
  auto hits = index.search_topk(Embedding::unit({1, 0}), 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].entry_id, 3);
  EXPECT_EQ(hits[1].entry_id, 9);
  EXPECT_EQ(hits[2].entry_id, 5);
}

TEST(VectorIndexTest, MatchesBruteForceScan) {
  std::mt19937_64 rng(3);
  VectorIndex index(24);
  std::vector<IndexEntry> entries;
  for (int i = 0; i < 1000; ++i) {
    entries.push_back({i * 3 + 1, testing_support::random_unit(24, rng)});
    index.insert(entries.back());
  }
  for (int q = 0; q < 200; ++q) {
    auto query = testing_support::random_unit(24, rng);
    auto got = index.search_topk(query, 3);
    auto want = testing_support::brute_force_topk(entries, query, 3);
    ASSERT_EQ(testing_support::ids_of(got), testing_support::ids_of(want)) << "query " << q;
  }
}

TEST(VectorIndexTest, RemoveSoleEntryEmptiesSearch) {
  VectorIndex index(2);
  index.insert({1, Embedding::unit({1, 0})});
  index.remove(1);
  EXPECT_TRUE(index.search_topk(Embedding::unit({1, 0}), 1).empty());
  EXPECT_THROW(index.remove(1), NotFoundError);
  index.insert({1, Embedding::unit({1, 0})});
  EXPECT_EQ(index.search_topk(Embedding::unit({1, 0}), 1).at(0).entry_id, 1);
}

TEST(VectorIndexTest, RemovalsMatchScanOverSurvivors) {
  std::mt19937_64 rng(4);
  VectorIndex index(12);
  std::vector<IndexEntry> entries;
  for (int i = 0; i < 1000; ++i) {
    entries.push_back({i, testing_support::random_unit(12, rng)});
    index.insert(entries.back());
  }
  std::vector<EntryId> ids(1000);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<EntryId> removed(ids.begin(), ids.begin() + 100);
  for (auto id : removed) index.remove(id);
  std::vector<IndexEntry> survivors;
  for (const auto& e : entries) {
    if (std::find(removed.begin(), removed.end(), e.entry_id) == removed.end()) {
      survivors.push_back(e);
    }
  }
  EXPECT_EQ(index.size(), 900u);
  for (int q = 0; q < 50; ++q) {
    auto query = testing_support::random_unit(12, rng);
    EXPECT_EQ(testing_support::ids_of(index.search_topk(query, 10)),
              testing_support::ids_of(testing_support::brute_force_topk(survivors, query, 10)));
  }
}

TEST(VectorIndexTest, SubsetSearchOnlyRanksAllowedIds) {
  VectorIndex index(2);
  index.insert({1, Embedding::unit({1, 0})});
  index.insert({2, Embedding::unit({0.9, 0.1})});
  index.insert({3, Embedding::unit({0, 1})});
  auto hits = index.search_subset(Embedding::unit({1, 0}), {3, 2, 42}, 5);
  EXPECT_EQ(testing_support::ids_of(hits), (std::vector<EntryId>{2, 3}));
}

TEST(VectorIndexTest, CosineIsSymmetric) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    auto a = testing_support::random_unit(64, rng);
    auto b = testing_support::random_unit(64, rng);
    EXPECT_NEAR(cosine(a, b), cosine(b, a), 1e-9);
  }
}

class VectorIndexPersistTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = testing_support::fresh_dir("vector_index_persist"); }
  std::filesystem::path dir_;
};

TEST_F(VectorIndexPersistTest, EmptyRoundTrip) {
  VectorIndex index(8);
  index.persist(dir_ / "empty.vec");
  auto loaded = VectorIndex::load(dir_ / "empty.vec");
  EXPECT_EQ(loaded.size(), 0u);
  EXPECT_EQ(loaded.dim(), 8u);
}

TEST_F(VectorIndexPersistTest, ProbeEquivalenceAfterRoundTrip) {
  std::mt19937_64 rng(6);
  VectorIndex index(20);
  for (int i = 0; i < 1000; ++i) index.insert({i * 7, testing_support::random_unit(20, rng)});
  index.persist(dir_ / "big.vec");
  auto loaded = VectorIndex::load(dir_ / "big.vec");
  ASSERT_EQ(loaded.size(), 1000u);
  for (int q = 0; q < 50; ++q) {
    auto query = testing_support::random_unit(20, rng);
    EXPECT_EQ(index.search_topk(query, 5), loaded.search_topk(query, 5));
  }
}

TEST_F(VectorIndexPersistTest, TruncatedBlobReportsOffset) {
  VectorIndex index(4);
  index.insert({1, Embedding::unit({1, 2, 3, 4})});
  index.insert({2, Embedding::unit({4, 3, 2, 1})});
  index.persist(dir_ / "t.vec");
  auto blob = files::read_all(dir_ / "t.vec");
  // header is 20 bytes, each entry 8 + 16
  std::filesystem::remove(VectorIndex::manifest_path(dir_ / "t.vec"));
  {
    std::ofstream out(dir_ / "t.vec", std::ios::binary | std::ios::trunc);
    out.write(blob.data(), 40);
  }
  try {
    VectorIndex::load(dir_ / "t.vec");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 28u);
  }
}

TEST_F(VectorIndexPersistTest, BadMagicIsFormatError) {
  files::write_atomic(dir_ / "junk.vec", "not a vector blob");
  EXPECT_THROW(VectorIndex::load(dir_ / "junk.vec"), FormatError);
}

}  // namespace
}  // namespace kurag
