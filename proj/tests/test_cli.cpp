#include <doctest.h>

#include <sstream>

#include "amf/annotation.hpp"
#include "amf/checkpoint.hpp"
#include "amf/dataset.hpp"
#include "amf/json_config.hpp"
#include "cli.hpp"
#include "test_helpers.hpp"

using namespace amf;
using amf::testing::read_bytes;
using amf::testing::snapshot_tree;
using amf::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run amf_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_json(const fs::path& path, const Json& j) { std::ofstream(path) << j.dump(2); }

Json small_spec_json() {
  return Json::parse(R"({
    "subjects": 3, "samples_per_subject": 4,
    "class_names": ["Positive", "Negative", "Surprise"],
    "class_weights": [0.4, 0.3, 0.3],
    "visual_dim": 6, "audio_steps": 6, "audio_dim": 4
  })");
}

Json small_experiment(const Json& data) {
  Json j;
  j["data"] = data;
  j["model"] = Json::parse(R"({"common_dim": 8, "heads": 2,
                               "audio": {"layers": [{"channels": 6, "width": 2, "stride": 1}]}})");
  j["train"] = Json::parse(R"({"epochs": 3, "batch_size": 4, "learning_rate": 0.01})");
  return j;
}

AnnotationRecord annotation(std::string clip, std::set<std::string> aus) {
  return {std::move(clip), "S01", 10, 12, 14, 30, std::move(aus), Emotion::surprise};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("argument errors exit with the validation code") {
  CHECK(amf_cli({}).code == cli::kExitInvalid);
  CHECK(amf_cli({"dance"}).code == cli::kExitInvalid);
  CHECK(amf_cli({"--help"}).code == cli::kExitOk);
  CHECK(amf_cli({"eval", "--config", "/nonexistent.json", "--seed", "1", "--out", "x"}).code ==
        cli::kExitInvalid);

  TempDir dir("cli_args");
  write_json(dir / "cfg.json", small_experiment({{"synthetic", small_spec_json()}}));
  const Run no_seed = amf_cli({"eval", "--config", (dir / "cfg.json").string(), "--out", (dir / "o").string()});
  CHECK(no_seed.code == cli::kExitInvalid);
  CHECK(contains(no_seed.err, "--seed"));
  CHECK_FALSE(fs::exists(dir / "o"));

  const Run bad_modality = amf_cli({"eval", "--config", (dir / "cfg.json").string(), "--seed", "1",
                                    "--out", (dir / "o").string(), "--modality", "smell"});
  CHECK(bad_modality.code == cli::kExitInvalid);

  Json typo = small_experiment({{"synthetic", small_spec_json()}});
  typo["trian"] = Json::object();
  write_json(dir / "typo.json", typo);
  const Run r = amf_cli({"eval", "--config", (dir / "typo.json").string(), "--seed", "1", "--out",
                         (dir / "o").string()});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(contains(r.err, "trian"));
}

TEST_CASE("gen writes a loadable dataset deterministically") {
  TempDir dir("cli_gen");
  Json spec = Json::parse(R"({"subjects": 2, "samples_per_subject": 3,
                              "class_names": ["Positive", "Negative"], "class_weights": [0.5, 0.5],
                              "visual_groups": [0, 1], "audio_groups": [0, 1],
                              "visual_dim": 4, "audio_steps": 5, "audio_dim": 3})");
  write_json(dir / "spec.json", spec);
  const Run a = amf_cli({"gen", "--config", (dir / "spec.json").string(), "--seed", "5", "--out",
                         (dir / "a").string()});
  REQUIRE(a.code == cli::kExitOk);
  CHECK(contains(a.out, "Positive"));
  const Dataset d = load_manifest(dir / "a/manifest.json");
  CHECK(d.samples.size() == 6);
  CHECK(d.class_names == std::vector<std::string>{"Positive", "Negative"});
  CHECK(fs::exists(dir / "a/config.json"));
  CHECK(read_annotations(dir / "a/annotations.jsonl").size() == 6);

  CHECK(amf_cli({"gen", "--config", (dir / "spec.json").string(), "--seed", "5", "--out",
                 (dir / "b").string()}).code == cli::kExitOk);
  CHECK(snapshot_tree(dir / "a") == snapshot_tree(dir / "b"));

  // No seed anywhere is an error; a seed inside the synthetic spec is enough.
  CHECK(amf_cli({"gen", "--config", (dir / "spec.json").string(), "--out", (dir / "c").string()}).code ==
        cli::kExitInvalid);
  CHECK_FALSE(fs::exists(dir / "c"));
  spec["seed"] = 99;
  write_json(dir / "seeded.json", spec);
  CHECK(amf_cli({"gen", "--config", (dir / "seeded.json").string(), "--out", (dir / "c").string()}).code ==
        cli::kExitOk);
}

TEST_CASE("gen rejects bad weights before writing anything") {
  TempDir dir("cli_gen_bad");
  Json spec = small_spec_json();
  spec["class_weights"] = {0.3, 0.3, 0.3};
  write_json(dir / "spec.json", spec);
  const Run r = amf_cli({"gen", "--config", (dir / "spec.json").string(), "--seed", "1", "--out",
                         (dir / "out").string()});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(contains(r.err, "class_weights"));
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("ablate is reproducible and thread-count independent") {
  TempDir dir("cli_ablate");
  write_json(dir / "cfg.json", small_experiment({{"synthetic", small_spec_json()}}));
  const std::string cfg = (dir / "cfg.json").string();
  const Run a = amf_cli({"ablate", "--config", cfg, "--seed", "3", "--out", (dir / "a").string()});
  REQUIRE(a.code == cli::kExitOk);
  CHECK(contains(a.out, "Visual+Audio"));
  CHECK(amf_cli({"ablate", "--config", cfg, "--seed", "3", "--out", (dir / "b").string()}).code == 0);
  CHECK(amf_cli({"ablate", "--config", cfg, "--seed", "3", "--out", (dir / "c").string(), "--threads",
                 "4"}).code == 0);
  const auto ta = snapshot_tree(dir / "a");
  CHECK(ta.size() == 9);
  CHECK(ta == snapshot_tree(dir / "b"));
  CHECK(ta == snapshot_tree(dir / "c"));

  const Json echo = Json::parse(ta.at("config.json"));
  CHECK(echo["seed"] == 3);
  CHECK(echo["config"]["model"]["visual"]["feature_dim"] == 6);
  CHECK(echo["config"]["data"]["synthetic"].contains("seed"));

  CHECK(amf_cli({"ablate", "--config", cfg, "--seed", "4", "--out", (dir / "d").string()}).code == 0);
  CHECK(snapshot_tree(dir / "d") != ta);
}

TEST_CASE("ablate names the first sample missing audio") {
  TempDir dir("cli_missing");
  write_json(dir / "spec.json", small_spec_json());
  REQUIRE(amf_cli({"gen", "--config", (dir / "spec.json").string(), "--seed", "2", "--out",
                   (dir / "ds").string()}).code == 0);
  Json manifest = Json::parse(read_bytes(dir / "ds/manifest.json"));
  const std::string victim = manifest["samples"][4]["clip_id"];
  manifest["samples"][4]["audio"] = nullptr;
  manifest["samples"][7]["audio"] = nullptr;
  write_json(dir / "ds/manifest.json", manifest);
  write_json(dir / "cfg.json", small_experiment({{"manifest", "ds/manifest.json"}}));

  const auto before = snapshot_tree(dir / "ds");
  const Run r = amf_cli({"ablate", "--config", (dir / "cfg.json").string(), "--seed", "1", "--out",
                         (dir / "out").string()});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(contains(r.err, victim));
  CHECK(contains(r.err, "audio"));
  CHECK_FALSE(fs::exists(dir / "out"));

  // The visual-only path does not need audio.
  const Run v = amf_cli({"eval", "--config", (dir / "cfg.json").string(), "--seed", "1", "--out",
                         (dir / "v").string(), "--modality", "visual"});
  CHECK(v.code == cli::kExitOk);
  CHECK(fs::exists(dir / "v/report_visual.json"));
  CHECK(fs::exists(dir / "v/report_visual.txt"));
  CHECK(snapshot_tree(dir / "ds") == before);
}

TEST_CASE("train saves a checkpoint and echoes its config") {
  TempDir dir("cli_train");
  Json cfg = small_experiment({{"synthetic", small_spec_json()}});
  cfg["classes"] = {"Negative", "Positive"};
  write_json(dir / "cfg.json", cfg);
  const Run r = amf_cli({"train", "--config", (dir / "cfg.json").string(), "--seed", "8", "--out",
                         (dir / "t").string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(contains(r.err, "epoch 3"));
  const FusionModel m = load_checkpoint(dir / "t/model.ckpt");
  CHECK(m.config().num_classes == 2);
  const Json log = Json::parse(read_bytes(dir / "t/train_log.json"));
  CHECK(log["epoch_losses"].size() == 3);
  const Json echo = Json::parse(read_bytes(dir / "t/config.json"));
  CHECK(echo["command"] == "train");
  CHECK(echo["modality"] == "fused");
  CHECK(echo["config"]["classes"] == Json({"Negative", "Positive"}));

  CHECK(amf_cli({"train", "--config", (dir / "cfg.json").string(), "--seed", "8", "--out",
                 (dir / "t2").string()}).code == 0);
  CHECK(snapshot_tree(dir / "t") == snapshot_tree(dir / "t2"));
}

TEST_CASE("iaa reports per-clip and aggregate agreement") {
  TempDir dir("cli_iaa");
  const std::vector<AnnotationRecord> a{annotation("c1", {"AU1", "AU2"}),
                                        annotation("c2", {"AU4", "AU7", "AU9", "AU12", "AU50"})};
  const std::vector<AnnotationRecord> b{annotation("c1", {"AU1", "AU5"}),
                                        annotation("c2", {"AU4", "AU7", "AU9", "AU12", "AU14"})};
  write_annotations(dir / "a.jsonl", a);
  write_annotations(dir / "b.jsonl", b);

  const Run same = amf_cli({"iaa", (dir / "a.jsonl").string(), (dir / "a.jsonl").string()});
  CHECK(same.code == cli::kExitOk);
  CHECK(contains(same.out, "mean per-clip r 1.0000"));
  CHECK(contains(same.out, "pooled r        1.0000"));

  const Run r = amf_cli({"iaa", (dir / "a.jsonl").string(), (dir / "b.jsonl").string(), "--out",
                         (dir / "o").string()});
  CHECK(r.code == cli::kExitOk);
  const Json j = Json::parse(read_bytes(dir / "o/iaa.json"));
  CHECK(j["clips"][0]["r"].get<double>() == doctest::Approx(0.5));
  CHECK(j["clips"][1]["r"].get<double>() == doctest::Approx(0.8));
  CHECK(j["mean_per_clip"].get<double>() == doctest::Approx(0.65));
  CHECK(j["pooled"].get<double>() == doctest::Approx(10.0 / 14));

  write_annotations(dir / "c.jsonl", std::vector<AnnotationRecord>{annotation("c9", {"AU1"})});
  const Run bad = amf_cli({"iaa", (dir / "a.jsonl").string(), (dir / "c.jsonl").string()});
  CHECK(bad.code == cli::kExitInvalid);
  CHECK(contains(bad.err, "c9"));
  CHECK(contains(bad.err, "c1"));
}

TEST_CASE("stats sweeps annotations") {
  TempDir dir("cli_stats");
  auto bad = annotation("late", {"AU4"});
  bad.offset_frame = 40;  // 30 frames at 30 fps
  write_annotations(dir / "ann.jsonl",
                    std::vector<AnnotationRecord>{annotation("ok", {"AU4"}), bad});
  const Run r = amf_cli({"stats", "--annotations", (dir / "ann.jsonl").string()});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(contains(r.out, "late: duration"));
  CHECK(contains(r.out, "1 of 2 annotation records valid"));

  write_json(dir / "cfg.json", small_experiment({{"synthetic", small_spec_json()}}));
  const Run s = amf_cli({"stats", "--config", (dir / "cfg.json").string(), "--seed", "1"});
  CHECK(s.code == cli::kExitOk);
  CHECK(contains(s.out, "total"));
  CHECK(amf_cli({"stats"}).code == cli::kExitInvalid);
}

TEST_CASE("gradcheck command") {
  TempDir dir("cli_gc");
  Json cfg;
  cfg["model"] = Json::parse(R"({"visual": {"feature_dim": 5}, "audio": {"input_dim": 3,
      "layers": [{"channels": 4, "width": 2, "stride": 1}]}, "common_dim": 8, "heads": 2})");
  cfg["gradcheck"] = {{"samples", 2}, {"audio_steps", 5}};
  write_json(dir / "gc.json", cfg);
  const Run r = amf_cli({"gradcheck", "--config", (dir / "gc.json").string(), "--seed", "1"});
  CHECK(r.code == cli::kExitOk);
  CHECK(contains(r.out, "PASS"));
  CHECK(contains(r.out, "fusion.va.head0.query"));

  cfg["gradcheck"]["tolerance"] = 0.0;
  write_json(dir / "strict.json", cfg);
  CHECK(amf_cli({"gradcheck", "--config", (dir / "strict.json").string(), "--seed", "1"}).code ==
        cli::kExitRuntime);
}
