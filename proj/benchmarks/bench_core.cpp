#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "dimseed/evaluator.hpp"
#include "dimseed/geometry.hpp"
#include "dimseed/response_parser.hpp"
#include "dimseed/sampler.hpp"

using namespace dimseed;

namespace {

Dimensions random_dims(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> l(2.5, 7.0), w(1.4, 2.6), h(1.2, 3.0);
  return {l(rng), w(rng), h(rng)};
}

CameraCalibration camera(const std::string& id, double yaw) {
  CameraCalibration c;
  c.camera_id = id;
  c.fx = c.fy = 500.0;
  c.cx = 320.0;
  c.cy = 240.0;
  c.image_width = 640;
  c.image_height = 480;
  const Eigen::Vector3d fwd(std::cos(yaw), std::sin(yaw), 0.0);
  const Eigen::Vector3d right(std::sin(yaw), -std::cos(yaw), 0.0);
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  c.rotation.row(0) = right;
  c.rotation.row(1) = down;
  c.rotation.row(2) = fwd;
  c.translation = -c.rotation * Eigen::Vector3d(0.0, 0.0, 1.5);
  return c;
}

void BM_BevIou(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<Dimensions> dims(1024);
  for (auto& d : dims) d = random_dims(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bev_iou_centered(dims[i % 1024], dims[(i + 1) % 1024]));
    ++i;
  }
}
BENCHMARK(BM_BevIou);

void BM_SelectBestViews(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::map<std::string, CameraCalibration> cals;
  for (int k = 0; k < 6; ++k) {
    const std::string id = "cam" + std::to_string(k);
    cals[id] = camera(id, k * 1.047);
  }
  VehicleTrack track;
  track.track_id = "bench";
  std::uniform_real_distribution<double> pos(-30.0, 30.0);
  for (int s = 0; s < state.range(0); ++s) {
    const Box3d box{Eigen::Vector3d(pos(rng), pos(rng), 0.8), random_dims(rng), 0.3};
    for (const auto& [id, _] : cals) track.observations.push_back({s * 0.1, id, box, id});
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_best_views(track, cals));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelectBestViews)->Arg(10)->Arg(100);

void BM_ParseResponse(benchmark::State& state) {
  const std::string text =
      "```json\n{\"significantly_occluded\": false, \"make\": \"Toyota\", \"model\": \"Camry\", "
      "\"generation_year_range\": \"2018-2024\", \"vehicle_type\": \"sedan\", \"configuration\": \"4-door\", "
      "\"length_m\": 4.88, \"width_m\": 1.84, \"height_m\": 1.44, \"length_modification\": \"none\", "
      "\"width_modification\": \"none\", \"height_modification\": \"none\"}\n```";
  for (auto _ : state) benchmark::DoNotOptimize(parse_response(text, PromptVariant::refined_vmmgr));
}
BENCHMARK(BM_ParseResponse);

void BM_ComputeMetrics(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<DimPrediction> preds;
  LabelMap labels;
  for (int i = 0; i < state.range(0); ++i) {
    const std::string id = "t" + std::to_string(i);
    preds.push_back({id, random_dims(rng), i % 5 == 0, {}, {}});
    GroundTruthLabel label;
    label.dims = random_dims(rng);
    labels[id] = label;
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(preds, labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeMetrics)->Arg(100)->Arg(10000);

}  // namespace
BENCHMARK_MAIN();
