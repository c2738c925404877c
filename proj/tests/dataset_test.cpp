#include <gtest/gtest.h>

#include <filesystem>
#include <unistd.h>

#include "parplan/dataset.hpp"
#include "parplan/evaluator.hpp"
#include "parplan/util.hpp"

namespace parplan {
namespace {

DatasetSpec small_spec() {
  return spec_from_json(Json::parse(R"([{"node_count":8,"structure":"random","samples":15},
                                        {"node_count":8,"structure":"tree","samples":10},
                                        {"node_count":10,"structure":"random","edge_relation":"uniform","samples":5}])"));
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto d = std::filesystem::temp_directory_path() / ("parplan_ds_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(d);
  return d;
}

TEST(DatasetSpecTest, Presets) {
  auto train = training_spec();
  ASSERT_EQ(train.size(), 6u);
  std::size_t total = 0;
  for (const auto& r : train) total += r.samples;
  EXPECT_EQ(total, 12000u);
  auto test = testing_spec();
  EXPECT_EQ(test.size(), 12u);
  total = 0;
  for (const auto& r : test) total += r.samples;
  EXPECT_EQ(total, 3000u);
  EXPECT_EQ(spec_from_json(Json("train")).size(), 6u);
  EXPECT_EQ(spec_from_json(Json::parse(R"({"preset":"test"})")).size(), 12u);
}

TEST(DatasetSpecTest, RejectsBadRows) {
  EXPECT_THROW(spec_from_json(Json("everything")), Error);
  EXPECT_THROW(spec_from_json(Json::parse(R"([{"node_count":8,"structure":"random","samples":1,"colour":1}])")), Error);
  EXPECT_THROW(spec_from_json(Json::parse(R"([{"node_count":8,"structure":"tree","edge_relation":"uniform","samples":1}])")),
               Error);
  EXPECT_THROW(spec_from_json(Json::parse(R"([{"node_count":8,"samples":1}])")), Error);
  auto spec = small_spec();
  EXPECT_EQ(spec_from_json(spec_to_json(spec)).size(), spec.size());
}

TEST(DatasetTest, BuildIsDeterministicAndIndependentOfJobs) {
  auto spec = small_spec();
  auto a = build_dataset(spec, 5, {1, {}});
  auto b = build_dataset(spec, 5, {4, {}});
  ASSERT_EQ(a.size(), 30u);
  ASSERT_EQ(b.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].to_json(), b[i].to_json());
  auto c = build_dataset(spec, 6, {});
  EXPECT_NE(a[0].to_json(), c[0].to_json());
}

TEST(DatasetTest, InstanceSeedsAreAddressable) {
  auto spec = small_spec();
  auto batch = generate_batch(spec, 9);
  GenConfig cfg = spec[1].config;
  cfg.seed = instance_seed(9, 1, 3);
  EXPECT_EQ(generate_graph(cfg).graph, batch[15 + 3].graph);
  EXPECT_EQ(batch[18].meta.seed, cfg.seed);
}

TEST(DatasetTest, LabelsRevalidate) {
  for (const auto& inst : build_dataset(small_spec(), 2)) {
    auto v = validate_plan(inst.graph, inst.optimal.plan, inst.optimal.value);
    EXPECT_EQ(v.status, PlanStatus::kOptimal);
    EXPECT_EQ(v.schedule->value(), inst.optimal.value);
    if (inst.second_best) {
      auto w = validate_plan(inst.graph, inst.second_best->plan, inst.optimal.value);
      EXPECT_TRUE(w.errors.empty());
      EXPECT_GE(w.schedule->value(), inst.optimal.value);
      EXPECT_NE(inst.second_best->rule_ids, inst.optimal.rule_ids);
    }
  }
}

TEST(DatasetTest, EmittersAndManifest) {
  auto spec = small_spec();
  auto insts = build_dataset(spec, 3);
  std::size_t with_second = 0;
  for (const auto& i : insts) with_second += i.second_best ? 1 : 0;

  auto opt = emit_sft(insts, SftMode::kOpt);
  EXPECT_EQ(opt.size(), insts.size());
  EXPECT_EQ(opt[0]["label"], "optimal");
  EXPECT_EQ(opt[0]["input"], insts[0].to_json()["graph"].dump());
  EXPECT_EQ(emit_sft(insts, SftMode::kOptFeas).size(), insts.size() + with_second);
  auto dpo = emit_dpo(insts);
  EXPECT_EQ(dpo.records.size(), with_second);
  EXPECT_EQ(dpo.skipped, insts.size() - with_second);

  auto dir = temp_dir("emit");
  auto manifest = write_dataset(dir, spec, 3, insts, {Emit::kSftOpt, Emit::kSftMixed, Emit::kDpo});
  EXPECT_EQ(manifest["counts"]["instances"], insts.size());
  EXPECT_EQ(manifest["counts"]["sft_mixed"], insts.size() + with_second);
  for (const auto& [name, info] : manifest["files"].items()) {
    auto content = read_file(dir / name);
    EXPECT_EQ(info["sha256"], sha256_hex(content)) << name;
    EXPECT_EQ(read_jsonl(dir / name).size(), info["records"].get<std::size_t>()) << name;
  }
  EXPECT_EQ(read_json_file(dir / "manifest.json"), manifest);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(parse_emit("sft"), Error);
}

}  // namespace
}  // namespace parplan
