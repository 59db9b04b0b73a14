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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "kurag/backends/mock.hpp"
#include "kurag/passage.hpp"
#include "kurag/query_pipeline.hpp"
#include "planted.hpp"

namespace kurag {
namespace {

constexpr std::size_t kDim = 512;

class FixedDetector final : public DetectorBackend {
 public:
  explicit FixedDetector(std::vector<std::string> crops, bool fail = false)
      : crops_(std::move(crops)), fail_(fail) {}
  std::vector<Detection> detect(const ImageData&) const override {
    if (fail_) throw Error("detector offline");
    std::vector<Detection> out;
    for (const auto& c : crops_) out.push_back({{0, 0, 1, 1}, c});
    return out;
  }

 private:
  std::vector<std::string> crops_;
  bool fail_;
};

VisualQuery tagged_query(const std::string& tag) {
  return {ImageData{"scene.png", make_tag("scene")}, make_tag(tag) + " what is this?"};
}

TEST(SelectObjectTest, ExactlyOneCropAboveGammaIsUsed) {
  MockEncoder enc(kDim);
  FixedDetector det({make_tag("b"), make_tag("a")});
  auto sel = select_query_object(tagged_query("a"), det, enc, 0.25);
  EXPECT_EQ(sel.source, ObjectSelection::Source::kObject);
  ASSERT_TRUE(sel.object_index);
  EXPECT_EQ(*sel.object_index, 1u);
  EXPECT_EQ(sel.vector, enc.embed_image(make_tag("a")));
  ASSERT_EQ(sel.object_scores.size(), 2u);
  EXPECT_NEAR(sel.object_scores[1], 1.0, 1e-6);
}

TEST(SelectObjectTest, SeveralOrNoneAboveGammaUseWholeImage) {
  MockEncoder enc(kDim);
  auto whole = enc.embed_image(make_tag("scene"));
  FixedDetector two({make_tag("a"), make_tag("a")});
  auto sel = select_query_object(tagged_query("a"), two, enc, 0.25);
  EXPECT_EQ(sel.source, ObjectSelection::Source::kWholeImage);
  EXPECT_EQ(sel.vector, whole);

  FixedDetector none({make_tag("b")});
  EXPECT_EQ(select_query_object(tagged_query("a"), none, enc, 0.25).vector, whole);

  FixedDetector empty({});
  EXPECT_EQ(select_query_object(tagged_query("a"), empty, enc, 0.25).reason, "no detections");
}

TEST(SelectObjectTest, GammaComparisonIsStrict) {
  MockEncoder enc(kDim);
  FixedDetector det({make_tag("a")});
  auto at = select_query_object(tagged_query("a"), det, enc, 1.0);
  EXPECT_EQ(at.source, ObjectSelection::Source::kWholeImage);
  auto below = select_query_object(tagged_query("a"), det, enc, 0.999);
  EXPECT_EQ(below.source, ObjectSelection::Source::kObject);
}

TEST(SelectObjectTest, DetectorFailureFallsBackWithWarning) {
  MockEncoder enc(kDim);
  FixedDetector det({}, true);
  std::vector<std::string> warnings;
  auto sel = select_query_object(tagged_query("a"), det, enc, 0.25, &warnings);
  EXPECT_EQ(sel.source, ObjectSelection::Source::kWholeImage);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("detector offline"), std::string::npos);
  VisualQuery text_only{std::nullopt, "q"};
  EXPECT_THROW(select_query_object(text_only, det, enc, 0.25), PreconditionError);
}

TEST(PipelineConfigTest, DefaultTopKIsThree) {
  PipelineConfig c;
  EXPECT_EQ(c.ku_topk, 3u);
  EXPECT_EQ(c.chunk_topk, 3u);
  EXPECT_EQ(PipelineConfig::from_json(nlohmann::json::object()).ku_topk, 3u);
  EXPECT_THROW(PipelineConfig::from_json({{"topk", 3}}), ValidationError);
  EXPECT_THROW(PipelineConfig::from_json({{"gamma", 2.0}}), ValidationError);
  EXPECT_THROW(PipelineConfig::from_json({{"chunk_topk", 0}}), ValidationError);
}

TEST(RewriteTest, Format) {
  auto rq = rewrite_query("When was this bridge built?", "Karnin Lift Bridge");
  EXPECT_EQ(rq.rewritten, "When was this bridge built? [SEP] Karnin Lift Bridge [SEP] bridge, built");
  EXPECT_EQ(rq.keywords, (std::vector<std::string>{"bridge", "built"}));
  auto scrubbed = rewrite_query("a [SEP] b?", "N[SEP]");
  std::size_t seps = 0;
  for (auto p = scrubbed.rewritten.find(kSep); p != std::string::npos;
       p = scrubbed.rewritten.find(kSep, p + 1)) {
    ++seps;
  }
  EXPECT_EQ(seps, 2u);
  EXPECT_THROW(rewrite_query("  ", "x"), PreconditionError);
}

// Planted store: entity i's images carry a tag orthogonal to every other
// entity's, so the query image scores 1 against its own unit and 0 elsewhere.
class PlantedPipelineTest : public ::testing::Test {
 protected:
  testing_support::PlantedHarness h{testing_support::make_planted_suite(12, false)};
};

TEST_F(PlantedPipelineTest, MatchRanksGoldFirstThenTiesById) {
  auto view = h.store.read();
  auto q = h.query(5);
  auto vec = view.encoder().embed_image(q.image->bytes);
  auto units = match_knowledge_units(view, vec, 3);
  ASSERT_EQ(units.size(), 3u);
  EXPECT_EQ(units[0].ku_id, text::slugify(h.suite.entities[5].name));
  EXPECT_NEAR(units[0].score, 1.0, 1e-6);
  EXPECT_LT(units[1].ku_id, units[2].ku_id);
  auto all = match_knowledge_units(view, vec, 100);
  EXPECT_EQ(all.size(), 12u);
  EXPECT_THROW(match_knowledge_units(view, vec, 0), ValidationError);
}

TEST_F(PlantedPipelineTest, DetailEndsUnionInRankOrder) {
  auto view = h.store.read();
  std::vector<UnitMatch> units = {{"harlan-abbey", "", 1.0}, {"karnin-bridge", "", 0.5}};
  auto set = combine_detail_ends(view, units);
  auto a = view.unit("harlan-abbey")->chunk_ids;
  auto b = view.unit("karnin-bridge")->chunk_ids;
  std::vector<ChunkId> expect = a;
  expect.insert(expect.end(), b.begin(), b.end());
  EXPECT_EQ(set.chunk_ids, expect);
  EXPECT_EQ(set.owner.at(a[0]), "harlan-abbey");
  EXPECT_EQ(set.owner.at(b[0]), "karnin-bridge");
  EXPECT_THROW(combine_detail_ends(view, {{"ghost", "", 1.0}}), IntegrityError);
}

TEST_F(PlantedPipelineTest, RetrievalIsScopedAndMatchesOracle) {
  auto view = h.store.read();
  auto units = match_knowledge_units(view, view.encoder().embed_image(h.query(3).image->bytes), 3);
  auto c_ku = combine_detail_ends(view, units);
  auto rq = rewrite_query(testing_support::kYearQuestion, units[0].name);
  auto got = retrieve_chunks(view, rq, c_ku, 3);
  // Oracle: score every chunk of C_ku directly and sort.
  auto q = view.encoder().embed_text(rq.rewritten);
  std::vector<std::pair<double, ChunkId>> scored;
  for (auto id : c_ku.chunk_ids) {
    scored.push_back({cosine(q, *view.chunk_index().get(id)), id});
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  ASSERT_EQ(got.hits.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(got.hits[i].chunk_id, scored[i].second);
    EXPECT_EQ(got.hits[i].ku_id, c_ku.owner.at(scored[i].second));
  }
  EXPECT_EQ(got.hits[0].chunk_id, h.answer_chunk(3));
}

TEST_F(PlantedPipelineTest, RawQueryVectorSwitch) {
  auto view = h.store.read();
  auto units = match_knowledge_units(view, view.encoder().embed_image(h.query(3).image->bytes), 3);
  auto c_ku = combine_detail_ends(view, units);
  auto rq = rewrite_query(testing_support::kYearQuestion, units[0].name);
  auto raw = retrieve_chunks(view, rq, c_ku, 1, true);
  auto expect = view.chunk_index().search_subset(view.encoder().embed_text(rq.raw), c_ku.chunk_ids, 1);
  EXPECT_EQ(raw.hits[0].chunk_id, expect[0].entry_id);
}

TEST_F(PlantedPipelineTest, RetrievalPreconditions) {
  auto view = h.store.read();
  auto rq = rewrite_query("q?", "n");
  EXPECT_THROW(retrieve_chunks(view, rq, DetailEndSet{}, 3), PreconditionError);
  DetailEndSet dangling;
  dangling.chunk_ids = {9999};
  dangling.owner[9999] = "x";
  EXPECT_THROW(retrieve_chunks(view, rq, dangling, 3), IntegrityError);
}

TEST_F(PlantedPipelineTest, LargerTopKExtendsRankings) {
  auto view = h.store.read();
  auto vec = view.encoder().embed_image(h.query(7).image->bytes);
  for (std::size_t k = 1; k < 6; ++k) {
    auto a = match_knowledge_units(view, vec, k);
    auto b = match_knowledge_units(view, vec, k + 1);
    ASSERT_EQ(a.size(), k);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(),
                           [](const auto& x, const auto& y) { return x.ku_id == y.ku_id; }));
  }
  auto c_ku = combine_detail_ends(view, match_knowledge_units(view, vec, 3));
  auto rq = rewrite_query(testing_support::kYearQuestion, h.suite.entities[7].name);
  for (std::size_t k = 1; k < c_ku.chunk_ids.size(); ++k) {
    auto a = retrieve_chunks(view, rq, c_ku, k).hits;
    auto b = retrieve_chunks(view, rq, c_ku, k + 1).hits;
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST_F(PlantedPipelineTest, EvidenceTraceForPlantedQuery) {
  MockDetector det;
  PipelineConfig cfg;
  auto view = h.store.read();
  std::string stage;
  auto trace = retrieve_evidence(view, h.query(4), det, cfg, &stage);
  EXPECT_EQ(stage, "retrieve");
  EXPECT_FALSE(trace.text_only);
  EXPECT_EQ(trace.units.size(), 3u);
  EXPECT_EQ(trace.units[0].name, h.suite.entities[4].name);
  EXPECT_EQ(trace.chunks.hits.size(), 3u);
  auto j = trace.to_json();
  EXPECT_EQ(j["units"].size(), 3u);
  EXPECT_EQ(j["selection"]["source"], "whole_image");
}

TEST(RetrieveEvidenceTest, DegradesToTextOnlyWhenNoUnitMatches) {
  StoreConfig cfg;
  cfg.embedding_dim = kDim;
  KnowledgeStore store(cfg, std::make_shared<MockEncoder>(kDim));
  MockDetector det;
  VisualQuery q{ImageData{"q.png", "pixels"}, "What is it?"};
  {
    auto trace = retrieve_evidence(store.read(), q, det, PipelineConfig{});
    EXPECT_TRUE(trace.text_only);
    EXPECT_TRUE(trace.chunks.hits.empty());
  }
  Document d;
  d.doc_id = "d";
  d.body = "plain text without names";
  store.ingest_document(d, std::vector<ImageData>{});
  auto trace = retrieve_evidence(store.read(), q, det, PipelineConfig{});
  EXPECT_TRUE(trace.text_only);
  ASSERT_EQ(trace.chunks.hits.size(), 1u);
  EXPECT_EQ(trace.chunks.hits[0].ku_id, "");
  EXPECT_FALSE(trace.warnings.empty());
}

TEST_F(PlantedPipelineTest, AlignGroupsByImageInRankOrder) {
  auto view = h.store.read();
  const auto* karnin = view.unit("karnin-bridge");
  const auto* belmor = view.unit("belmor-tower");
  RetrievedChunkSet hits;
  hits.hits = {{karnin->chunk_ids[1], "karnin-bridge", 0.9},
               {belmor->chunk_ids[0], "belmor-tower", 0.8},
               {karnin->chunk_ids[0], "karnin-bridge", 0.7}};
  auto items = align_and_fuse(view, hits);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].ku_name, "Karnin Bridge");
  EXPECT_EQ(items[0].chunk_ids, (std::vector<ChunkId>{karnin->chunk_ids[1], karnin->chunk_ids[0]}));
  EXPECT_EQ(items[0].image_ref, "kb/e00.png");
  EXPECT_EQ(items[1].ku_name, "Belmor Tower");

  MultimodalPassage mp{items, std::nullopt, {}};
  auto expected = "[Image 1][[Karnin Bridge][" + view.chunk(karnin->chunk_ids[1])->text() + "][" +
                  view.chunk(karnin->chunk_ids[0])->text() + "]]\n[Image 2][[Belmor Tower][" +
                  view.chunk(belmor->chunk_ids[0])->text() + "]]";
  EXPECT_EQ(passage_text(mp), expected);

  RetrievedChunkSet ghost;
  ghost.hits = {{424242, "", 0.1}};
  EXPECT_THROW(align_and_fuse(view, ghost), IntegrityError);
}

TEST(PassageTest, UnitsWithoutImagesGetTheirOwnItems) {
  StoreConfig cfg;
  cfg.embedding_dim = kDim;
  KnowledgeStore store(cfg, std::make_shared<MockEncoder>(kDim));
  Document d;
  d.doc_id = "d";
  d.title = "Old Mill";
  d.body = "Grain was ground here.";
  auto r = store.ingest_document(d, std::vector<ImageData>{});
  auto view = store.read();
  RetrievedChunkSet hits;
  hits.hits = {{r.chunks[0].chunk_id, "old-mill", 1.0}};
  auto items = align_and_fuse(view, hits);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_FALSE(items[0].image_id);
  MultimodalPassage mp{items, std::nullopt, {}};
  EXPECT_EQ(passage_text(mp), "[No image][[Old Mill][Grain was ground here.]]");
}

AlignedEvidence evidence(std::optional<ImageId> img, std::string ref, std::string name,
                         std::vector<std::string> texts) {
  AlignedEvidence e;
  e.image_id = img;
  e.image_ref = std::move(ref);
  e.ku_name = std::move(name);
  e.texts = std::move(texts);
  return e;
}

TEST(PassageTest, StitchRequiresItems) {
  EXPECT_THROW(stitch_passage({}, PassageMode::kStructured), PreconditionError);
  auto mp = stitch_passage({evidence(std::nullopt, "", "N", {"t"})}, PassageMode::kStructured);
  EXPECT_FALSE(mp.raster_png);
}

TEST(PassageTest, WrapKeepsWordsAndWidth) {
  auto lines = raster::wrap("alpha beta gamma delta", 11);
  EXPECT_EQ(lines, (std::vector<std::string>{"alpha beta", "gamma delta"}));
  auto split = raster::wrap("abcdefghijkl", 5);
  EXPECT_EQ(split, (std::vector<std::string>{"abcde", "fghij", "kl"}));
}

TEST(PassageTest, RasterIsDeterministicAndStacksPanels) {
  RgbImage photo(40, 20, 0);
  photo.fill_rect(0, 0, 20, 20, 255, 0, 0);
  std::map<std::string, std::string> files = {{"red.png", encode_png(photo)}};
  ImageLoader loader = [&](const std::string& ref) {
    auto it = files.find(ref);
    if (it == files.end()) throw NotFoundError("missing " + ref);
    return it->second;
  };
  std::vector<AlignedEvidence> items = {
      evidence(ImageId{1}, "red.png", "Karnin Bridge", {"It opened in 1907."}),
      evidence(ImageId{2}, "gone.png", "Old Mill", {"Grain."}),
      evidence(std::nullopt, "", "Notes", {"No picture here."})};
  auto a = stitch_passage(items, PassageMode::kRaster, loader);
  auto b = stitch_passage(items, PassageMode::kRaster, loader);
  ASSERT_TRUE(a.raster_png);
  EXPECT_EQ(*a.raster_png, *b.raster_png);
  ASSERT_EQ(a.warnings.size(), 1u);
  EXPECT_NE(a.warnings[0].find("gone.png"), std::string::npos);

  auto decoded = decode_png(*a.raster_png);
  ASSERT_TRUE(decoded);
  EXPECT_EQ(decoded->width, raster::kPanelWidth);
  int expected_height = raster::render_panel(items[0], files["red.png"]).height +
                        raster::render_panel(items[1], std::nullopt).height +
                        raster::render_panel(items[2], std::nullopt).height;
  EXPECT_EQ(decoded->height, expected_height);
  // The photo is scaled to the inner width; its left half is red.
  auto px = [&](int x, int y) {
    auto i = (static_cast<std::size_t>(y) * decoded->width + x) * 3;
    return std::array<int, 3>{decoded->pixels[i], decoded->pixels[i + 1], decoded->pixels[i + 2]};
  };
  EXPECT_EQ(px(raster::kMargin + 10, raster::kMargin + 10), (std::array<int, 3>{255, 0, 0}));
  EXPECT_EQ(px(raster::kPanelWidth - raster::kMargin - 10, raster::kMargin + 10),
            (std::array<int, 3>{0, 0, 0}));
}

TEST(PassageTest, PassageModeStrings) {
  EXPECT_EQ(passage_mode_from_string("raster"), PassageMode::kRaster);
  EXPECT_STREQ(to_string(PassageMode::kStructured), "structured");
  EXPECT_THROW(passage_mode_from_string("pdf"), ValidationError);
}

}  // namespace
}  // namespace kurag
