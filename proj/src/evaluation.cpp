#include "amf/evaluation.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "amf/errors.hpp"
#include "amf/random.hpp"

namespace amf {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string rpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

bool has_input(const AVSample& s, Modality m) {
  switch (m) {
    case Modality::visual: return s.visual.has_value();
    case Modality::audio: return s.audio.has_value();
    case Modality::fused: return s.visual.has_value() && s.audio.has_value();
  }
  return false;
}

struct FoldOutcome {
  std::vector<Prediction> predictions;
  FoldResult result;
};

FoldOutcome run_fold(const Dataset& data, const Fold& fold, const EvalConfig& config,
                     Modality modality, std::uint64_t fold_seed) {
  // Runtime guard, independent of how the plan was built.
  check_fold(fold, data.samples);

  std::vector<AVSample> train;
  train.reserve(fold.train.size());
  for (std::size_t i : fold.train) train.push_back(data.samples[i]);
  TrainResult trained = train_model(train, config.model, config.train, modality, fold_seed);

  FoldOutcome out;
  std::size_t correct = 0;
  for (std::size_t i : fold.test) {
    const AVSample& s = data.samples[i];
    const std::size_t p = predict(s, trained.model, modality);
    correct += p == s.label;
    out.predictions.push_back({s.clip_id, s.subject_id, p, s.label});
  }
  out.result.subject = fold.held_out_subject;
  out.result.train_size = fold.train.size();
  out.result.test_size = fold.test.size();
  out.result.accuracy = fold.test.empty() ? 0.0 : static_cast<double>(correct) / fold.test.size();
  out.result.epoch_losses = std::move(trained.epoch_losses);
  return out;
}

// Runs every (fold, modality) job; results land in job order so the outcome
// does not depend on scheduling.
template <class Job>
std::vector<FoldOutcome> run_jobs(std::size_t count, const RunOptions& options, const Job& job) {
  std::vector<FoldOutcome> outcomes(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      if (failed) return;
      try {
        outcomes[k] = job(k);
      } catch (...) {
        errors[k] = std::current_exception();
        failed = true;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outcomes;
}

EvalReport assemble(const Dataset& data, const EvalConfig& config, Modality modality,
                    std::uint64_t seed, const FoldPlan& plan, std::vector<FoldOutcome> outcomes) {
  std::vector<Prediction> predictions;
  std::vector<FoldResult> folds;
  for (auto& o : outcomes) {
    predictions.insert(predictions.end(), o.predictions.begin(), o.predictions.end());
    folds.push_back(std::move(o.result));
  }
  return make_report(modality, seed, config, data.class_names, plan.hash, std::move(predictions),
                     std::move(folds));
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return derive_seed(seed, "fold", fold);
}

void log_fold(const RunOptions& options, std::mutex& mu, Modality m, const FoldOutcome& o,
              std::size_t k, std::size_t n) {
  if (!options.log) return;
  const std::string line = std::string(to_string(m)) + " fold " + std::to_string(k + 1) + "/" +
                           std::to_string(n) + " (" + o.result.subject + "): acc " +
                           fmt("%.4f", o.result.accuracy);
  std::lock_guard lock(mu);
  options.log(line);
}

}  // namespace

Json to_json(const EvalConfig& config) {
  Json j;
  j["model"] = to_json(config.model);
  j["train"] = to_json(config.train);
  return j;
}

EvalReport make_report(Modality modality, std::uint64_t seed, const EvalConfig& config,
                       const std::vector<std::string>& class_names, std::uint64_t plan_hash,
                       std::vector<Prediction> predictions, std::vector<FoldResult> folds) {
  EvalReport r;
  r.modality = modality;
  r.seed = seed;
  r.config = config;
  r.class_names = class_names;
  r.fold_plan_hash = plan_hash;
  std::vector<std::size_t> preds, labels;
  for (const auto& p : predictions) {
    preds.push_back(p.predicted);
    labels.push_back(p.truth);
  }
  r.confusion = confusion_matrix(preds, labels, class_names.size());
  r.per_class = per_class_metrics(r.confusion);
  r.accuracy = accuracy(preds, labels);
  r.uf1 = uf1(r.confusion);
  r.predictions = std::move(predictions);
  r.folds = std::move(folds);
  return r;
}

Json to_json(const EvalReport& r) {
  Json j;
  j["modality"] = to_string(r.modality);
  j["seed"] = r.seed;
  j["config"] = to_json(r.config);
  j["class_names"] = r.class_names;
  j["fold_plan_hash"] = hash_hex(r.fold_plan_hash);
  j["samples"] = r.predictions.size();
  j["accuracy"] = r.accuracy;
  j["uf1"] = r.uf1;
  Json per_class = Json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    per_class.push_back({{"class", r.class_names[c]},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support},
                         {"degenerate", m.degenerate}});
  }
  j["per_class"] = per_class;
  j["confusion"] = r.confusion.counts;
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"subject", f.subject},
                     {"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"accuracy", f.accuracy},
                     {"epoch_losses", f.epoch_losses}});
  }
  j["folds"] = folds;
  Json preds = Json::array();
  for (const auto& p : r.predictions) {
    preds.push_back({{"clip_id", p.clip_id},
                     {"subject_id", p.subject_id},
                     {"predicted", r.class_names[p.predicted]},
                     {"true", r.class_names[p.truth]}});
  }
  j["predictions"] = preds;
  return j;
}

std::string format_report(const EvalReport& r) {
  std::size_t name_w = 8;
  for (const auto& n : r.class_names) name_w = std::max(name_w, n.size() + 2);

  std::string out;
  out += "modality " + std::string(to_string(r.modality)) + "  seed " + std::to_string(r.seed) +
         "  folds " + std::to_string(r.folds.size()) + "  samples " +
         std::to_string(r.predictions.size()) + "  plan " + hash_hex(r.fold_plan_hash) + "\n";
  out += "Acc " + fmt("%.2f%%", 100 * r.accuracy) + "  UF1 " + fmt("%.4f", r.uf1) + "\n\n";

  out += pad("class", name_w) + rpad("precision", 10) + rpad("recall", 8) + rpad("f1", 8) +
         rpad("support", 9) + "\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    out += pad(r.class_names[c], name_w) + rpad(fmt("%.4f", m.precision), 10) +
           rpad(fmt("%.4f", m.recall), 8) + rpad(fmt("%.4f", m.f1), 8) +
           rpad(std::to_string(m.support), 9) + (m.degenerate ? "  (no instances)" : "") + "\n";
  }

  out += "\nconfusion (rows true, columns predicted)\n" + pad("", name_w);
  for (const auto& n : r.class_names) out += rpad(n, name_w);
  out += "\n";
  for (std::size_t t = 0; t < r.confusion.classes; ++t) {
    out += pad(r.class_names[t], name_w);
    for (std::size_t c : r.confusion.counts[t]) out += rpad(std::to_string(c), name_w);
    out += "\n";
  }

  out += "\n" + pad("subject", 12) + rpad("train", 7) + rpad("test", 6) + rpad("acc", 9) + "\n";
  for (const auto& f : r.folds) {
    out += pad(f.subject, 12) + rpad(std::to_string(f.train_size), 7) +
           rpad(std::to_string(f.test_size), 6) + rpad(fmt("%.4f", f.accuracy), 9) + "\n";
  }
  return out;
}

void check_compatible(const Dataset& data, const ModelConfig& model, Modality modality) {
  model.validate();
  if (model.num_classes != data.class_names.size()) {
    throw InvalidConfig("model.num_classes is " + std::to_string(model.num_classes) +
                        " but the dataset has " + std::to_string(data.class_names.size()) +
                        " classes");
  }
  if (modality != Modality::audio) {
    if (model.visual.kind != data.visual.kind) {
      throw InvalidConfig("model.visual.kind does not match the dataset's visual inputs");
    }
    if (model.visual.kind == VisualKind::features &&
        model.visual.feature_dim != data.visual.feature_dim) {
      throw InvalidConfig("model.visual.feature_dim is " + std::to_string(model.visual.feature_dim) +
                          " but the dataset has " + std::to_string(data.visual.feature_dim));
    }
    if (model.visual.kind == VisualKind::frames &&
        (model.visual.frame_height != data.visual.frame_height ||
         model.visual.frame_width != data.visual.frame_width)) {
      throw InvalidConfig("model frame geometry does not match the dataset");
    }
  }
  if (modality != Modality::visual && model.audio.input_dim != data.audio_dim) {
    throw InvalidConfig("model.audio.input_dim is " + std::to_string(model.audio.input_dim) +
                        " but the dataset has " + std::to_string(data.audio_dim));
  }
  for (const auto& s : data.samples) {
    if (!has_input(s, modality)) {
      const char* missing = !s.visual ? "visual" : "audio";
      throw MissingModality("sample " + s.clip_id + " has no " + missing + " input, required for " +
                            std::string(to_string(modality)) + " evaluation");
    }
  }
}

EvalReport run_loso(const Dataset& data, const EvalConfig& config, Modality modality,
                    std::uint64_t seed, const RunOptions& options) {
  check_compatible(data, config.model, modality);
  config.train.validate(config.model.num_classes);
  const FoldPlan plan = loso_splits(data.samples);
  check_plan(plan, data.samples);

  std::mutex log_mu;
  const std::size_t n = plan.folds.size();
  auto outcomes = run_jobs(n, options, [&](std::size_t k) {
    FoldOutcome o = run_fold(data, plan.folds[k], config, modality, fold_seed(seed, k));
    log_fold(options, log_mu, modality, o, k, n);
    return o;
  });
  return assemble(data, config, modality, seed, plan, std::move(outcomes));
}

AblationResult run_ablation(const Dataset& data, const EvalConfig& config, std::uint64_t seed,
                            const RunOptions& options) {
  constexpr std::array<Modality, 3> kOrder{Modality::visual, Modality::audio, Modality::fused};
  check_compatible(data, config.model, Modality::fused);
  config.train.validate(config.model.num_classes);
  const FoldPlan plan = loso_splits(data.samples);
  check_plan(plan, data.samples);

  // All 3 x folds jobs share one pool; each (modality, fold) pair uses the
  // same per-fold seed as the other modalities.
  std::mutex log_mu;
  const std::size_t n = plan.folds.size();
  auto outcomes = run_jobs(3 * n, options, [&](std::size_t job) {
    const Modality m = kOrder[job / n];
    const std::size_t k = job % n;
    FoldOutcome o = run_fold(data, plan.folds[k], config, m, fold_seed(seed, k));
    log_fold(options, log_mu, m, o, k, n);
    return o;
  });

  AblationResult result;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<FoldOutcome> part(std::make_move_iterator(outcomes.begin() + i * n),
                                  std::make_move_iterator(outcomes.begin() + (i + 1) * n));
    result.reports[i] = assemble(data, config, kOrder[i], seed, plan, std::move(part));
  }
  return result;
}

std::string_view ablation_row_name(Modality modality) {
  switch (modality) {
    case Modality::visual: return "Visual";
    case Modality::audio: return "Audio";
    case Modality::fused: return "Visual+Audio";
  }
  return "?";
}

Json ablation_summary_json(const AblationResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.reports) {
    rows.push_back({{"modality", ablation_row_name(r.modality)},
                    {"accuracy", r.accuracy},
                    {"uf1", r.uf1}});
  }
  const auto& first = result.reports[0];
  Json j;
  j["seed"] = first.seed;
  j["fold_plan_hash"] = hash_hex(first.fold_plan_hash);
  j["folds"] = first.folds.size();
  j["samples"] = first.predictions.size();
  j["rows"] = rows;
  return j;
}

std::string format_ablation_table(const AblationResult& result) {
  std::string out = pad("Modality Type", 16) + rpad("Acc (%)", 9) + rpad("UF1", 9) + "\n";
  for (const auto& r : result.reports) {
    out += pad(std::string(ablation_row_name(r.modality)), 16) +
           rpad(fmt("%.2f", 100 * r.accuracy), 9) + rpad(fmt("%.4f", r.uf1), 9) + "\n";
  }
  return out;
}

}  // namespace amf
