#include <doctest.h>

#include <cstring>
#include <set>

#include "amf/checkpoint.hpp"
#include "amf/errors.hpp"
#include "amf/evaluation.hpp"
#include "amf/synthetic.hpp"
#include "metric_oracle.hpp"
#include "test_helpers.hpp"

using namespace amf;
using amf::testing::TempDir;

namespace {

std::vector<AVSample> subjects_dataset(Rng& rng, std::size_t subjects) {
  std::vector<AVSample> out;
  for (std::size_t s = 0; s < subjects; ++s) {
    const std::size_t n = 1 + rng.index(6);
    for (std::size_t k = 0; k < n; ++k) {
      AVSample a;
      a.subject_id = "P" + std::to_string(s);
      a.clip_id = a.subject_id + "_" + std::to_string(k);
      out.push_back(a);
    }
  }
  rng.shuffle(out);
  return out;
}

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.subjects = 4;
  spec.samples_per_subject = 6;
  spec.visual_dim = 6;
  spec.audio_steps = 6;
  spec.audio_dim = 4;
  spec.seed = seed;
  return spec;
}

EvalConfig small_eval_config(const SyntheticSpec& spec) {
  EvalConfig c;
  c.model = amf::testing::small_config();
  c.model.visual.feature_dim = spec.visual_dim;
  c.model.audio.input_dim = spec.audio_dim;
  c.model.num_classes = spec.class_names.size();
  c.train.epochs = 4;
  c.train.batch_size = 4;
  c.train.adam.learning_rate = 1e-2;
  return c;
}

bool same_bits(const FusionModel& a, const FusionModel& b) {
  const auto pa = a.named_parameters(), pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const Tensor& x = pa[i].var.value();
    const Tensor& y = pb[i].var.value();
    if (pa[i].name != pb[i].name || x.shape() != y.shape()) return false;
    if (std::memcmp(x.data().data(), y.data().data(), x.size() * sizeof(Real)) != 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("loso_splits on three subjects") {
  std::vector<AVSample> samples(7);
  const char* subjects[] = {"b", "a", "c", "a", "b", "c", "a"};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].subject_id = subjects[i];
    samples[i].clip_id = "clip" + std::to_string(i);
  }
  const FoldPlan plan = loso_splits(samples);
  REQUIRE(plan.folds.size() == 3);
  CHECK(plan.folds[0].held_out_subject == "a");
  CHECK(plan.folds[0].test == std::vector<std::size_t>{1, 3, 6});
  CHECK(plan.folds[1].test == std::vector<std::size_t>{0, 4});
  CHECK(plan.folds[2].test == std::vector<std::size_t>{2, 5});
  CHECK(plan.folds[2].train == std::vector<std::size_t>{0, 1, 3, 4, 6});
  CHECK(loso_splits(samples).hash == plan.hash);

  samples[6].clip_id = "renamed";
  CHECK(loso_splits(samples).hash != plan.hash);
}

TEST_CASE("loso_splits needs two subjects") {
  std::vector<AVSample> samples(3);
  for (auto& s : samples) s.subject_id = "only";
  CHECK_THROWS_AS(loso_splits(samples), TooFewSubjects);
  CHECK_THROWS_AS(loso_splits({}), TooFewSubjects);
}

TEST_CASE("fold plans partition random datasets without leakage") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t subjects = 2 + rng.index(19);
    const auto samples = subjects_dataset(rng, subjects);
    const FoldPlan plan = loso_splits(samples);
    CHECK(plan.folds.size() == subjects);
    std::vector<int> seen(samples.size(), 0);
    for (const auto& fold : plan.folds) {
      CHECK(fold.train.size() + fold.test.size() == samples.size());
      std::set<std::string> train_subjects;
      for (std::size_t i : fold.train) train_subjects.insert(samples[i].subject_id);
      CHECK(train_subjects.count(fold.held_out_subject) == 0);
      CHECK(train_subjects.size() == subjects - 1);
      for (std::size_t i : fold.test) {
        CHECK(samples[i].subject_id == fold.held_out_subject);
        ++seen[i];
      }
    }
    for (int s : seen) CHECK(s == 1);
    CHECK_NOTHROW(check_plan(plan, samples));
  }
}

TEST_CASE("leakage checks reject a tampered plan") {
  Rng rng(8);
  const auto samples = subjects_dataset(rng, 4);
  FoldPlan plan = loso_splits(samples);
  Fold leaky = plan.folds[1];
  leaky.train.push_back(leaky.test[0]);
  CHECK_THROWS_AS(check_fold(leaky, samples), SubjectLeakage);

  FoldPlan dropped = plan;
  dropped.folds[0].test.pop_back();
  CHECK_THROWS_AS(check_plan(dropped, samples), SubjectLeakage);

  FoldPlan foreign = plan;
  foreign.folds[0].test.push_back(plan.folds[1].test[0]);
  CHECK_THROWS_AS(check_plan(foreign, samples), SubjectLeakage);
}

TEST_CASE("ten subjects leave nine for training") {
  const auto data = generate_synthetic(SyntheticSpec{}).dataset;
  const FoldPlan plan = loso_splits(data.samples);
  CHECK(plan.folds.size() == 10);
  for (const auto& fold : plan.folds) {
    std::set<std::string> subjects;
    for (std::size_t i : fold.train) subjects.insert(data.samples[i].subject_id);
    CHECK(subjects.size() == 9);
  }
}

TEST_CASE("accuracy examples and errors") {
  using V = std::vector<std::size_t>;
  CHECK(accuracy(V{0, 1, 2}, V{0, 1, 2}) == 1.0);
  CHECK(accuracy(V{1, 2, 0}, V{0, 1, 2}) == 0.0);
  CHECK(accuracy(V{0, 1, 1, 0}, V{0, 1, 1, 1}) == 0.75);
  CHECK_THROWS_AS(accuracy(V{0}, V{0, 1}), LengthMismatch);
  CHECK_THROWS_AS(accuracy(V{}, V{}), EmptyInput);
  CHECK_THROWS_AS(uf1(V{0}, V{0, 1}, 2), LengthMismatch);
  CHECK_THROWS_AS(uf1(V{}, V{}, 2), EmptyInput);
  CHECK_THROWS_AS(uf1(V{0}, V{3}, 3), LabelOutOfRange);
}

TEST_CASE("uf1 hand cases") {
  using V = std::vector<std::size_t>;
  CHECK(uf1(V{0, 1, 2, 3}, V{0, 1, 2, 3}, 4) == 1.0);
  CHECK(uf1(V{1, 1}, V{1, 1}, 2) == doctest::Approx(0.5));

  const ConfusionMatrix cm = confusion_matrix(V{0, 0, 0, 0}, V{0, 0, 1, 1}, 2);
  const auto m = per_class_metrics(cm);
  CHECK(m[0].f1 == doctest::Approx(2.0 / 3));
  CHECK(m[1].f1 == 0.0);
  CHECK(uf1(cm) == doctest::Approx(1.0 / 3));
  CHECK(m[0].precision == 0.5);
  CHECK(m[0].recall == 1.0);
  CHECK_FALSE(m[1].degenerate);

  // Class 2 never occurs and is never predicted.
  const auto d = per_class_metrics(confusion_matrix(V{0, 1}, V{0, 1}, 3));
  CHECK(d[2].degenerate);
  CHECK(d[2].f1 == 0.0);
  CHECK(uf1(V{0, 1}, V{0, 1}, 3) == doctest::Approx(2.0 / 3));
}

TEST_CASE("metrics agree with the brute-force oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t classes = 2 + rng.index(3);
    const std::size_t n = 1 + rng.index(40);
    std::vector<std::size_t> preds(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng.index(classes);
      preds[i] = rng.uniform() < 0.5 ? labels[i] : rng.index(classes);
    }
    const double u = uf1(preds, labels, classes);
    CHECK(u == oracle::uf1(preds, labels, classes));
    CHECK(accuracy(preds, labels) == oracle::accuracy(preds, labels));
    CHECK(u >= 0.0);
    CHECK(u <= 1.0);

    const auto cm = confusion_matrix(preds, labels, classes);
    CHECK(cm.total() == n);
    CHECK(static_cast<double>(cm.trace()) / n == accuracy(preds, labels));
    bool full_support = true;
    for (std::size_t c = 0; c < classes; ++c)
      full_support = full_support && std::count(labels.begin(), labels.end(), c) > 0;
    if (full_support) CHECK((u == 1.0) == (preds == labels));
  }
}

TEST_CASE("train_model is deterministic and respects its inputs") {
  const SyntheticSpec spec = small_spec(3);
  const auto data = generate_synthetic(spec).dataset;
  const EvalConfig cfg = small_eval_config(spec);

  const auto a = train_model(data.samples, cfg.model, cfg.train, Modality::fused, 5);
  const auto b = train_model(data.samples, cfg.model, cfg.train, Modality::fused, 5);
  CHECK(same_bits(a.model, b.model));
  CHECK(a.epoch_losses == b.epoch_losses);
  CHECK(a.epoch_losses.size() == cfg.train.epochs);
  const auto c = train_model(data.samples, cfg.model, cfg.train, Modality::fused, 6);
  CHECK_FALSE(same_bits(a.model, c.model));

  TrainConfig frozen = cfg.train;
  frozen.adam.learning_rate = 0;
  const auto f = train_model(data.samples, cfg.model, frozen, Modality::fused, 5);
  CHECK(same_bits(f.model, FusionModel(cfg.model, 5)));

  // Unimodal training leaves the other branch at its initialization.
  const auto v = train_model(data.samples, cfg.model, cfg.train, Modality::visual, 5);
  const FusionModel init(cfg.model, 5);
  CHECK(v.model.encoders.audio.layers[0].kernels.value() ==
        init.encoders.audio.layers[0].kernels.value());
  CHECK(v.model.fusion.classifier.weight.value() == init.fusion.classifier.weight.value());
  CHECK_FALSE(v.model.visual_head.weight.value() == init.visual_head.weight.value());

  std::size_t epochs_seen = 0;
  train_model(data.samples, cfg.model, cfg.train, Modality::audio, 5,
              [&](std::size_t epoch, double loss) {
                CHECK(epoch == ++epochs_seen);
                CHECK(std::isfinite(loss));
              });
  CHECK(epochs_seen == cfg.train.epochs);
}

TEST_CASE("train_model errors") {
  const SyntheticSpec spec = small_spec(3);
  auto data = generate_synthetic(spec).dataset;
  const EvalConfig cfg = small_eval_config(spec);
  CHECK_THROWS_AS(train_model({}, cfg.model, cfg.train, Modality::fused, 1), EmptyTrainSet);

  data.samples[2].visual->data[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_model(data.samples, cfg.model, cfg.train, Modality::visual, 1), DivergedLoss);

  TrainConfig bad = cfg.train;
  bad.class_weights = {1, 1};
  CHECK_THROWS_AS(bad.validate(3), InvalidConfig);
  bad = cfg.train;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(3), InvalidConfig);
}

TEST_CASE("training fits a separable set") {
  SyntheticSpec spec = small_spec(12);
  spec.visual_groups = {0, 1, 2};
  spec.noise = 0.2;
  const auto data = generate_synthetic(spec).dataset;
  EvalConfig cfg = small_eval_config(spec);
  cfg.train.epochs = 40;
  for (Modality m : {Modality::visual, Modality::fused}) {
    const auto trained = train_model(data.samples, cfg.model, cfg.train, m, 2);
    std::size_t correct = 0;
    for (const auto& s : data.samples) correct += predict(s, trained.model, m) == s.label;
    CHECK(correct == data.samples.size());
    CHECK(trained.epoch_losses.back() < trained.epoch_losses.front());
  }
}

TEST_CASE("class weights reach the loss") {
  const SyntheticSpec spec = small_spec(3);
  const auto data = generate_synthetic(spec).dataset;
  EvalConfig cfg = small_eval_config(spec);
  cfg.train.epochs = 1;
  const auto plain = train_model(data.samples, cfg.model, cfg.train, Modality::fused, 5);
  cfg.train.class_weights = {1, 1, 1};
  CHECK(same_bits(plain.model, train_model(data.samples, cfg.model, cfg.train, Modality::fused, 5).model));
  cfg.train.class_weights = {1, 3, 1};
  CHECK_FALSE(
      same_bits(plain.model, train_model(data.samples, cfg.model, cfg.train, Modality::fused, 5).model));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const SyntheticSpec spec = small_spec(3);
  const auto data = generate_synthetic(spec).dataset;
  EvalConfig cfg = small_eval_config(spec);
  cfg.model.visual = amf::testing::small_config(VisualKind::frames).visual;
  cfg.model.audio.layers = {{5, 2, 1}, {4, 2, 2}};
  const FusionModel model(cfg.model, 17);

  TempDir dir("ckpt");
  save_checkpoint(dir / "m.ckpt", model);
  const FusionModel back = load_checkpoint(dir / "m.ckpt");
  CHECK(same_bits(model, back));
  CHECK(to_json(back.config()) == to_json(model.config()));

  const auto trained = train_model(data.samples, small_eval_config(spec).model, cfg.train,
                                   Modality::fused, 1);
  save_checkpoint(dir / "t.ckpt", trained.model);
  const FusionModel t = load_checkpoint(dir / "t.ckpt");
  CHECK(same_bits(trained.model, t));
  for (const auto& s : data.samples) {
    CHECK(forward(s, t, Modality::fused).value() == forward(s, trained.model, Modality::fused).value());
  }

  std::string bytes = amf::testing::read_bytes(dir / "t.ckpt");
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 8);
  CHECK_THROWS_AS(load_checkpoint(dir / "short.ckpt"), InputError);
  std::ofstream(dir / "junk.ckpt", std::ios::binary) << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), InputError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), MissingFile);
}

TEST_CASE("run_loso reaches 1.0 on noise-free subject-independent data") {
  SyntheticSpec spec = small_spec(21);
  spec.visual_groups = spec.audio_groups = {0, 1, 2};
  spec.noise = 0;
  spec.subject_shift = 0;
  const auto data = generate_synthetic(spec).dataset;
  EvalConfig cfg = small_eval_config(spec);
  cfg.train.epochs = 20;
  const EvalReport r = run_loso(data, cfg, Modality::fused, 4);
  CHECK(r.accuracy == 1.0);
  CHECK(r.uf1 == 1.0);
  CHECK(r.folds.size() == spec.subjects);
  CHECK(r.confusion.total() == data.samples.size());
  CHECK(r.accuracy == static_cast<double>(r.confusion.trace()) / r.confusion.total());
}

TEST_CASE("run_loso on a single-class dataset") {
  SyntheticSpec spec = small_spec(22);
  spec.class_weights = {1, 0, 0};
  const auto data = generate_synthetic(spec).dataset;
  EvalConfig cfg = small_eval_config(spec);
  cfg.train.epochs = 10;
  const EvalReport r = run_loso(data, cfg, Modality::fused, 4);
  CHECK(r.accuracy == 1.0);
  CHECK(r.per_class[0].f1 == 1.0);
  CHECK(r.per_class[1].degenerate);
  CHECK(r.per_class[2].degenerate);
  CHECK(r.uf1 == doctest::Approx(1.0 / 3));
}

TEST_CASE("run_loso is deterministic and thread-count independent") {
  const SyntheticSpec spec = small_spec(23);
  const auto data = generate_synthetic(spec).dataset;
  const EvalConfig cfg = small_eval_config(spec);
  const std::string a = to_json(run_loso(data, cfg, Modality::fused, 9)).dump(2);
  const std::string b = to_json(run_loso(data, cfg, Modality::fused, 9)).dump(2);
  CHECK(a == b);
  RunOptions parallel;
  parallel.threads = 4;
  const EvalReport p = run_loso(data, cfg, Modality::fused, 9, parallel);
  CHECK(to_json(p).dump(2) == a);
  CHECK(format_report(p) == format_report(run_loso(data, cfg, Modality::fused, 9)));
  CHECK(to_json(run_loso(data, cfg, Modality::fused, 10)).dump(2) != a);
}

TEST_CASE("run_ablation shares the protocol across settings") {
  const SyntheticSpec spec = small_spec(24);
  auto data = generate_synthetic(spec).dataset;
  const EvalConfig cfg = small_eval_config(spec);
  RunOptions options;
  options.threads = 3;
  std::vector<std::string> log;
  options.log = [&](std::string_view line) { log.emplace_back(line); };
  const AblationResult r = run_ablation(data, cfg, 11, options);
  CHECK(log.size() == 3 * spec.subjects);
  CHECK(r.reports[0].modality == Modality::visual);
  CHECK(r.reports[1].modality == Modality::audio);
  CHECK(r.reports[2].modality == Modality::fused);
  for (const auto& rep : r.reports) CHECK(rep.fold_plan_hash == r.reports[0].fold_plan_hash);

  // Each row matches a standalone run with the same seed.
  for (const auto& rep : r.reports) {
    CHECK(to_json(rep) == to_json(run_loso(data, cfg, rep.modality, 11)));
  }

  const std::string table = format_ablation_table(r);
  CHECK(table.find("Visual+Audio") != std::string::npos);
  CHECK(table.find("\nVisual ") != std::string::npos);
  CHECK(table.find("\nAudio ") != std::string::npos);
  const Json summary = ablation_summary_json(r);
  CHECK(summary["rows"].size() == 3);
  CHECK(summary["rows"][2]["modality"] == "Visual+Audio");

  // The visual path never reads audio.
  for (auto& s : data.samples) s.audio->features.fill(0);
  CHECK(to_json(run_loso(data, cfg, Modality::visual, 11)) == to_json(r.reports[0]));
}

TEST_CASE("evaluation rejects incompatible inputs up front") {
  const SyntheticSpec spec = small_spec(25);
  auto data = generate_synthetic(spec).dataset;
  EvalConfig cfg = small_eval_config(spec);

  data.samples[5].audio.reset();
  data.samples[9].audio.reset();
  try {
    run_ablation(data, cfg, 1);
    FAIL("expected MissingModality");
  } catch (const MissingModality& e) {
    CHECK(std::string(e.what()).find(data.samples[5].clip_id) != std::string::npos);
  }
  CHECK_NOTHROW(check_compatible(data, cfg.model, Modality::visual));
  CHECK_THROWS_AS(check_compatible(data, cfg.model, Modality::audio), MissingModality);

  EvalConfig wrong = cfg;
  wrong.model.num_classes = 4;
  CHECK_THROWS_AS(check_compatible(data, wrong.model, Modality::visual), InvalidConfig);
  wrong = cfg;
  wrong.model.audio.input_dim = 5;
  CHECK_THROWS_AS(check_compatible(data, wrong.model, Modality::audio), InvalidConfig);
  CHECK_NOTHROW(check_compatible(data, wrong.model, Modality::visual));
  wrong = cfg;
  wrong.model.visual.feature_dim = 7;
  CHECK_THROWS_AS(check_compatible(data, wrong.model, Modality::visual), InvalidConfig);
}

TEST_CASE("report serialization") {
  const std::vector<std::string> names{"Positive", "Negative"};
  std::vector<Prediction> preds{{"a1", "A", 0, 0}, {"a2", "A", 0, 1}, {"b1", "B", 1, 1}};
  std::vector<FoldResult> folds{{"A", 1, 2, 0.5, {0.7, 0.6}}, {"B", 2, 1, 1.0, {0.5}}};
  const EvalReport r = make_report(Modality::audio, 3, EvalConfig{}, names, 0xabcULL, preds, folds);
  CHECK(r.accuracy == doctest::Approx(2.0 / 3));
  const Json j = to_json(r);
  CHECK(j["modality"] == "audio");
  CHECK(j["fold_plan_hash"] == "0000000000000abc");
  CHECK(j["confusion"] == Json::parse("[[1,0],[1,1]]"));
  CHECK(j["predictions"][1]["predicted"] == "Positive");
  CHECK(j["predictions"][1]["true"] == "Negative");
  CHECK(j["folds"][0]["epoch_losses"].size() == 2);
  CHECK(j["config"]["train"]["epochs"] == 30);

  const std::string text = format_report(r);
  CHECK(text.find("Acc 66.67%") != std::string::npos);
  CHECK(text.find("Negative") != std::string::npos);
}

TEST_CASE("train config JSON is strict") {
  TrainConfig c;
  c.epochs = 7;
  c.class_weights = {1, 2};
  const TrainConfig back = train_config_from_json(to_json(c));
  CHECK(back.epochs == 7);
  CHECK(back.class_weights == c.class_weights);
  CHECK(back.adam.learning_rate == c.adam.learning_rate);
  CHECK_THROWS_AS(train_config_from_json(Json::parse(R"({"epoch": 3})")), InvalidConfig);
  CHECK_THROWS_AS(train_config_from_json(Json::parse(R"({"epochs": -3})")), InvalidConfig);
  CHECK_THROWS_AS(train_config_from_json(Json::parse(R"({"learning_rate": "fast"})")), InvalidConfig);
}
