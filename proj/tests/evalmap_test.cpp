// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "coco_oracle.hpp"
#include "srdet/evalmap.hpp"
#include "test_util.hpp"

namespace srdet {
namespace {

Detection car(double a, double b, double c, double d, double score) {
  return {a, b, c, d, 3, score};
}

std::vector<bool> tp_flags(const std::vector<MatchResult>& m) {
  std::vector<bool> out;
  for (const auto& r : m) out.push_back(r.gt.has_value());
  return out;
}

TEST(Match, ExactBoxesAllTrue) {
  const std::vector<Detection> gt = {car(0, 0, 10, 10, 1), car(20, 20, 30, 30, 1)};
  for (double t : {0.5, 0.75, 0.95}) {
    EXPECT_EQ(tp_flags(match_detections(gt, gt, t)), (std::vector<bool>{true, true}));
  }
}

TEST(Match, IouPointSixAtTwoThresholds) {
  // 10x10 gt, prediction shifted so that IoU = 75 / 125 = 0.6.
  const std::vector<Detection> gt = {car(0, 0, 10, 10, 1)};
  const std::vector<Detection> pred = {car(0, 2.5, 10, 12.5, 0.9)};
  ASSERT_DOUBLE_EQ(iou(gt[0], pred[0]), 0.6);
  EXPECT_EQ(tp_flags(match_detections(gt, pred, 0.5)), (std::vector<bool>{true}));
  EXPECT_EQ(tp_flags(match_detections(gt, pred, 0.75)), (std::vector<bool>{false}));
}

TEST(Match, TwoPredictionsOneGt) {
  const std::vector<Detection> gt = {car(0, 0, 10, 10, 1)};
  const std::vector<Detection> pred = {car(0, 0, 10, 10, 0.9), car(0, 0, 10, 9, 0.5)};
  EXPECT_EQ(tp_flags(match_detections(gt, pred, 0.5)), (std::vector<bool>{true, false}));
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision({true, true}, 2), 1.0);
  EXPECT_EQ(average_precision({}, 3), 0.0);
  EXPECT_FALSE(average_precision({false}, 0).has_value());
  const double expected = (1.0 * 51 + (2.0 / 3.0) * 50) / 101;
  EXPECT_NEAR(*average_precision({true, false, true}, 2), expected, 1e-12);
  EXPECT_NEAR(expected, 0.8350, 5e-5);
}

GroundTruth two_frame_gt() {
  GroundTruth gt;
  gt.images = {{1, 200, 200, "a.png"}, {2, 200, 200, "b.png"}};
  gt.annotations = {{1, 1, 10, 10, 20, 20, 3, 400},
                    {2, 1, 50, 50, 60, 40, 3, 2400},
                    {3, 2, 5, 5, 8, 6, 3, 48},
                    {4, 2, 100, 100, 30, 30, 8, 900}};
  return gt;
}

PredictionMap perfect(const GroundTruth& gt) {
  PredictionMap p;
  for (const auto& a : gt.annotations) {
    Detection d = a.as_box();
    d.score = 1.0;
    p[a.image_id].items.push_back(d);
  }
  return p;
}

TEST(Evaluate, PerfectPredictionsScoreOne) {
  const GroundTruth gt = two_frame_gt();
  const EvalReport r = evaluate(gt, perfect(gt));
  for (const auto& c : columns(r)) {
    ASSERT_TRUE(c.has_value());
    EXPECT_DOUBLE_EQ(*c, 1.0);
  }
  ASSERT_EQ(r.per_frame_counts.size(), 2u);
  EXPECT_EQ(r.per_frame_counts[0].detections, 2u);
}

TEST(Evaluate, EmptyPredictionsScoreZero) {
  const EvalReport r = evaluate(two_frame_gt(), {});
  for (const auto& c : columns(r)) {
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(*c, 0.0);
  }
}

TEST(Evaluate, ClassFilterRestrictsCategories) {
  const GroundTruth gt = two_frame_gt();
  PredictionMap p = perfect(gt);
  // Drop the truck: overall mAP falls, cars-only stays perfect.
  std::erase_if(p[2].items, [](const Detection& d) { return d.class_id == 8; });
  EXPECT_LT(*evaluate(gt, p).map_all_50, 1.0);
  EvalSpec cars;
  cars.class_filter = std::vector<int>{3};
  const EvalReport r = evaluate(gt, p, cars);
  EXPECT_DOUBLE_EQ(*r.map_all_50, 1.0);
  EXPECT_EQ(r.per_frame_counts[1].detections, 1u);
}

TEST(Evaluate, AbsentBucketIsNA) {
  GroundTruth gt;
  gt.images = {{1, 100, 100, "a.png"}};
  gt.annotations = {{1, 1, 0, 0, 10, 10, 3, 100}};
  const EvalReport r = evaluate(gt, {});
  EXPECT_FALSE(r.map_medium_50.has_value());
  EXPECT_EQ(format_metric(r.map_medium_50), "NA");
}

TEST(Evaluate, UnknownImageIsError) {
  PredictionMap p;
  p[99].items.push_back(car(0, 0, 1, 1, 1));
  EXPECT_THROW(evaluate(two_frame_gt(), p), EvalError);
}

TEST(Evaluate, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) {
    const oracle::Instance in = oracle::random_instance(rng);
    EXPECT_LE(oracle::max_column_error(in), 1e-9) << "instance " << i;
  }
}

TEST(Evaluate, OracleAgreesOnHandExample) {
  // One frame, two cars, predictions ranked TP, FP, TP.
  oracle::Instance in;
  in.image_ids = {1};
  in.gts = {{1, 3, {0, 0, 10, 10}}, {1, 3, {50, 50, 60, 60}}};
  in.preds = {{1, 3, {0, 0, 10, 10}, 90}, {1, 3, {100, 100, 110, 110}, 80},
              {1, 3, {50, 50, 60, 60}, 70}};
  const auto ref = oracle::evaluate(in);
  const double expected = (1.0 * 51 + (2.0 / 3.0) * 50) / 101;
  EXPECT_NEAR(*ref[1], expected, 1e-12);
  EXPECT_NEAR(*evaluate(oracle::to_ground_truth(in), oracle::to_predictions(in)).map_all_50,
              expected, 1e-12);
}

TEST(Compare, IdenticalReportsZeroDeltas) {
  const GroundTruth gt = two_frame_gt();
  const EvalReport r = evaluate(gt, perfect(gt));
  const Comparison c = compare_reports(r, r);
  for (const auto& row : c.rows) {
    EXPECT_EQ(row.delta(), 0.0);
    EXPECT_FALSE(row.enhanced_better);
  }
  EXPECT_EQ(comparison_csv(c).find("**"), std::string::npos);
}

TEST(Compare, StrictlyBetterIsMarked) {
  const GroundTruth gt = two_frame_gt();
  const Comparison c = compare_reports(evaluate(gt, {}), evaluate(gt, perfect(gt)));
  for (const auto& row : c.rows) EXPECT_TRUE(row.enhanced_better) << row.metric;
  EXPECT_EQ(comparison_csv(c),
            "metric,base,enhanced\n"
            "map_all_5095,0.0000,**1.0000**\n"
            "map_all_50,0.0000,**1.0000**\n"
            "map_all_75,0.0000,**1.0000**\n"
            "map_small_5095,0.0000,**1.0000**\n"
            "map_medium_50,0.0000,**1.0000**\n");
  EXPECT_EQ(count_series_csv(c), "frame,n_base,n_enhanced\na.png,0,2\nb.png,0,2\n");
}

TEST(Compare, SpecMismatchRejected) {
  const GroundTruth gt = two_frame_gt();
  EvalSpec cars;
  cars.class_filter = std::vector<int>{3};
  EXPECT_THROW(compare_reports(evaluate(gt, {}), evaluate(gt, {}, cars)), EvalError);
}

TEST(Json, GroundTruthAndPredictionsRoundTrip) {
  const GroundTruth gt = two_frame_gt();
  const GroundTruth back = ground_truth_from_json(ground_truth_to_json(gt));
  EXPECT_EQ(back.annotations.size(), 4u);
  EXPECT_EQ(back.images[1].file_name, "b.png");
  DetectionSet set{{car(1, 2, 5, 8, 0.5)}, "a"};
  const PredictionMap p = predictions_from_json(predictions_to_json(set, "a.png"), gt);
  ASSERT_EQ(p.at(1).size(), 1u);
  EXPECT_EQ(p.at(1).items[0], car(1, 2, 5, 8, 0.5));
  nlohmann::json by_id = nlohmann::json::array(
      {{{"image_id", 2}, {"bbox", {1, 1, 2, 2}}, {"category_id", 3}, {"score", 0.7}}});
  EXPECT_EQ(predictions_from_json(by_id, gt).at(2).size(), 1u);
}

TEST(Json, BadInputsRejected) {
  const GroundTruth gt = two_frame_gt();
  EXPECT_THROW(predictions_from_json(nlohmann::json::object(), gt), EvalError);
  EXPECT_THROW(predictions_from_json(nlohmann::json::parse(
                                         R"([{"file_name":"zzz.png","bbox":[0,0,1,1],"category_id":3,"score":0.5}])"),
                                     gt),
               EvalError);
  EXPECT_THROW(predictions_from_json(nlohmann::json::parse(
                                         R"([{"image_id":1,"bbox":[0,0,1],"category_id":3,"score":0.5}])"),
                                     gt),
               EvalError);
  EXPECT_THROW(ground_truth_from_json(nlohmann::json::parse(R"({"images":[]})")), EvalError);
  testing::TempDir dir("eval");
  write_text_file(dir / "bad.json", "{nope");
  EXPECT_THROW(load_ground_truth(dir / "bad.json"), DecodeError);
}

}  // namespace
}  // namespace srdet
