#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "amf/annotation.hpp"
#include "amf/checkpoint.hpp"
#include "amf/errors.hpp"
#include "amf/evaluation.hpp"
#include "amf/gradcheck.hpp"
#include "amf/random.hpp"
#include "amf/synthetic.hpp"

namespace amf::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string modality = "fused";
  std::size_t threads = 1;
  std::string manifest;
  std::string annotations;
  std::vector<std::string> iaa_files;
};

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

std::string fixed(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// The synthetic generator's seed: explicit in the synthetic spec, else derived from --seed.
SyntheticSpec resolve_spec(Json spec_json, const std::optional<std::uint64_t>& seed) {
  if (!spec_json.is_object()) throw InvalidSpec("synthetic spec must be a JSON object");
  if (!spec_json.contains("seed")) {
    if (!seed) throw InvalidConfig("no seed: pass --seed or set \"seed\" in the synthetic spec");
    spec_json["seed"] = derive_seed(*seed, "synth");
  }
  SyntheticSpec spec = synthetic_spec_from_json(spec_json);
  spec.validate();
  return spec;
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void echo_config(const fs::path& dir, const std::string& command, std::uint64_t seed,
                 const Json& resolved, std::optional<Modality> modality = {}) {
  Json echo;
  echo["command"] = command;
  echo["seed"] = seed;
  if (modality) echo["modality"] = to_string(*modality);
  echo["config"] = resolved;
  write_text(dir / "config.json", echo.dump(2) + "\n");
}

std::uint64_t require_seed(const Flags& f) {
  if (!f.seed) throw InvalidConfig("--seed is required");
  return *f.seed;
}

RunOptions run_options(const Flags& f, std::ostream& err) {
  RunOptions options;
  options.threads = f.threads;
  options.log = [&err](std::string_view line) { err << line << "\n"; };
  return options;
}

int cmd_gen(const Flags& f, std::ostream& out) {
  Json spec_json = read_json_file(f.config);
  // A full experiment config is accepted too; its synthetic section is used.
  if (spec_json.is_object() && spec_json.contains("data")) {
    const Json& data = spec_json["data"];
    if (!data.is_object() || !data.contains("synthetic")) {
      throw InvalidConfig("config.data has no 'synthetic' section to generate from");
    }
    spec_json = data["synthetic"];
  }
  const SyntheticSpec spec = resolve_spec(spec_json, f.seed);
  const fs::path dir(f.out);
  const SyntheticDataset result = synthesize_dataset(spec, dir);
  echo_config(dir, "gen", spec.seed, to_json(spec));
  out << "wrote " << result.dataset.samples.size() << " samples to " << dir.string() << "\n";
  out << format_distribution(class_distribution(result.dataset.samples, result.dataset.class_names));
  return kExitOk;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(f);
  const Modality modality = parse_modality(f.modality);
  const Experiment ex = load_experiment(f.config, seed);
  check_compatible(ex.data, ex.eval.model, modality);
  const fs::path dir = prepare_out(f.out);
  echo_config(dir, "train", seed, ex.resolved, modality);

  const TrainResult trained =
      train_model(ex.data.samples, ex.eval.model, ex.eval.train, modality, seed,
                  [&err](std::size_t epoch, double loss) {
                    err << "epoch " << epoch << " loss " << fixed("%.6f", loss) << "\n";
                  });
  std::size_t correct = 0;
  for (const auto& s : ex.data.samples) correct += predict(s, trained.model, modality) == s.label;
  const double train_acc = static_cast<double>(correct) / ex.data.samples.size();

  save_checkpoint(dir / "model.ckpt", trained.model);
  Json log;
  log["modality"] = to_string(modality);
  log["seed"] = seed;
  log["epoch_losses"] = trained.epoch_losses;
  log["train_accuracy"] = train_acc;
  write_text(dir / "train_log.json", log.dump(2) + "\n");
  out << "trained " << to_string(modality) << " model on " << ex.data.samples.size()
      << " samples, final loss " << fixed("%.6f", trained.epoch_losses.back()) << ", train Acc "
      << fixed("%.2f%%", 100 * train_acc) << "\n";
  return kExitOk;
}

void write_report(const fs::path& dir, const EvalReport& r) {
  const std::string stem = "report_" + std::string(to_string(r.modality));
  write_text(dir / (stem + ".json"), to_json(r).dump(2) + "\n");
  write_text(dir / (stem + ".txt"), format_report(r));
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(f);
  const Modality modality = parse_modality(f.modality);
  const Experiment ex = load_experiment(f.config, seed);
  check_compatible(ex.data, ex.eval.model, modality);
  const fs::path dir = prepare_out(f.out);
  echo_config(dir, "eval", seed, ex.resolved, modality);
  const EvalReport r = run_loso(ex.data, ex.eval, modality, seed, run_options(f, err));
  write_report(dir, r);
  out << format_report(r);
  return kExitOk;
}

int cmd_ablate(const Flags& f, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(f);
  const Experiment ex = load_experiment(f.config, seed);
  check_compatible(ex.data, ex.eval.model, Modality::fused);
  const fs::path dir = prepare_out(f.out);
  echo_config(dir, "ablate", seed, ex.resolved);
  const AblationResult r = run_ablation(ex.data, ex.eval, seed, run_options(f, err));
  for (const auto& report : r.reports) write_report(dir, report);
  write_text(dir / "ablation_summary.json", ablation_summary_json(r).dump(2) + "\n");
  const std::string table = format_ablation_table(r);
  write_text(dir / "ablation_table.txt", table);
  out << table;
  return kExitOk;
}

int cmd_iaa(const Flags& f, std::ostream& out) {
  const auto first = read_annotations(f.iaa_files.at(0));
  const auto second = read_annotations(f.iaa_files.at(1));
  const AgreementSummary s = compute_iaa(first, second);

  std::size_t width = 8;
  for (const auto& c : s.clips) width = std::max(width, c.clip_id.size() + 2);
  std::string text = "clip_id" + std::string(width - 7, ' ') + "r\n";
  for (const auto& c : s.clips) {
    text += c.clip_id + std::string(width - c.clip_id.size(), ' ') + fixed("%.4f", c.r) +
            (c.both_empty ? "  (both AU sets empty)" : "") + "\n";
  }
  text += "\nclips " + std::to_string(s.clips.size()) + ", both-empty clips " +
          std::to_string(s.empty_clips) + "\n";
  text += "mean per-clip r " + fixed("%.4f", s.mean_per_clip) + "\n";
  text += "pooled r        " + fixed("%.4f", s.pooled) + "\n";
  out << text;

  if (!f.out.empty()) {
    const fs::path dir = prepare_out(f.out);
    Json clips = Json::array();
    for (const auto& c : s.clips) {
      clips.push_back({{"clip_id", c.clip_id}, {"r", c.r}, {"both_empty", c.both_empty}});
    }
    Json j;
    j["files"] = f.iaa_files;
    j["clips"] = clips;
    j["mean_per_clip"] = s.mean_per_clip;
    j["pooled"] = s.pooled;
    j["empty_clips"] = s.empty_clips;
    write_text(dir / "iaa.json", j.dump(2) + "\n");
    write_text(dir / "iaa.txt", text);
  }
  return kExitOk;
}

int cmd_stats(const Flags& f, std::ostream& out) {
  if (f.config.empty() && f.manifest.empty() && f.annotations.empty()) {
    throw InvalidConfig("stats needs --config, --manifest or --annotations");
  }
  if (!f.config.empty() && !f.manifest.empty()) {
    throw InvalidConfig("pass either --config or --manifest, not both");
  }
  if (!f.config.empty()) {
    const Experiment ex = load_experiment(f.config, f.seed);
    out << format_distribution(class_distribution(ex.data.samples, ex.data.class_names));
  } else if (!f.manifest.empty()) {
    const Dataset d = load_manifest(f.manifest);
    out << format_distribution(class_distribution(d.samples, d.class_names));
  }
  if (f.annotations.empty()) return kExitOk;

  const auto records = read_annotations(f.annotations);
  std::size_t bad = 0;
  for (const auto& rec : records) {
    const auto violations = validate_annotation(rec);
    if (!violations.empty()) ++bad;
    for (const auto& v : violations) out << rec.clip_id << ": " << v.field << ": " << v.message << "\n";
  }
  out << (records.size() - bad) << " of " << records.size() << " annotation records valid\n";
  return bad ? kExitInvalid : kExitOk;
}

int cmd_gradcheck(const Flags& f, std::ostream& out) {
  const std::uint64_t seed = require_seed(f);
  Json config = read_json_file(f.config);
  check_known_keys(config, {"data", "classes", "model", "train", "gradcheck"}, "config");
  const ModelConfig model_config = model_config_from_json(config.value("model", Json::object()));
  model_config.validate();

  Json gc = config.value("gradcheck", Json::object());
  check_known_keys(gc, {"samples", "audio_steps", "frames", "step", "tolerance", "max_coords_per_param"},
                   "config.gradcheck");
  auto get_size = [&](const char* key, std::size_t fallback) -> std::size_t {
    if (!gc.contains(key)) return fallback;
    if (!gc[key].is_number_unsigned()) {
      throw InvalidConfig(std::string("config.gradcheck.") + key + " must be a non-negative integer");
    }
    return gc[key].get<std::size_t>();
  };
  auto get_real = [&](const char* key, double fallback) -> double {
    if (!gc.contains(key)) return fallback;
    if (!gc[key].is_number()) throw InvalidConfig(std::string("config.gradcheck.") + key + " must be a number");
    return gc[key].get<double>();
  };
  const std::size_t n_samples = get_size("samples", 2);
  const std::size_t steps = get_size("audio_steps", std::max<std::size_t>(5, model_config.audio.min_length()));
  const std::size_t n_frames = get_size("frames", 3);
  GradCheckOptions options;
  options.step = get_real("step", options.step);
  options.tolerance = get_real("tolerance", options.tolerance);
  options.max_coords_per_param = get_size("max_coords_per_param", 0);
  options.seed = seed;
  if (n_samples == 0) throw InvalidConfig("config.gradcheck.samples must be positive");

  FusionModel model(model_config, seed);
  Rng rng(derive_seed(seed, "gradcheck/data"));
  std::vector<AVSample> samples;
  for (std::size_t i = 0; i < n_samples; ++i) {
    AVSample s;
    s.clip_id = "probe" + std::to_string(i);
    const auto& v = model_config.visual;
    Tensor visual = v.kind == VisualKind::features
                        ? Tensor({1, v.feature_dim})
                        : Tensor({n_frames, v.frame_height, v.frame_width});
    for (auto& x : visual.data()) x = rng.normal();
    s.visual = VisualInput{v.kind, std::move(visual)};
    Tensor audio({steps, model_config.audio.input_dim});
    for (auto& x : audio.data()) x = rng.normal();
    s.audio = AudioInput{std::move(audio)};
    s.label = i % model_config.num_classes;
    samples.push_back(std::move(s));
  }

  auto loss = [&] {
    std::vector<Var> losses;
    for (const auto& s : samples) losses.push_back(cross_entropy(forward(s, model, Modality::fused), s.label));
    return sum(mean_of(losses));
  };
  const GradCheckReport report = grad_check(loss, model.named_parameters(Modality::fused), options);
  const std::string text = format_report(report);
  out << text;
  if (!f.out.empty()) {
    const fs::path dir = prepare_out(f.out);
    echo_config(dir, "gradcheck", seed, config);
    write_text(dir / "gradcheck.txt", text);
  }
  return report.passed ? kExitOk : kExitRuntime;
}

}  // namespace

namespace {

void fill_missing(Json& obj, const char* key, const Json& value) {
  if (!obj.contains(key)) obj[key] = value;
}

}  // namespace

Experiment load_experiment(const fs::path& config_path, const std::optional<std::uint64_t>& seed) {
  Json config = read_json_file(config_path);
  check_known_keys(config, {"data", "classes", "model", "train", "gradcheck"}, "config");
  if (!config.contains("data")) throw InvalidConfig("config: missing 'data' section");
  Json& data_json = config["data"];
  check_known_keys(data_json, {"manifest", "synthetic"}, "config.data");
  if (data_json.contains("manifest") == data_json.contains("synthetic")) {
    throw InvalidConfig("config.data needs exactly one of 'manifest' or 'synthetic'");
  }

  Experiment ex;
  if (data_json.contains("manifest")) {
    if (!data_json["manifest"].is_string()) throw InvalidConfig("config.data.manifest must be a path");
    fs::path manifest = data_json["manifest"].get<std::string>();
    if (manifest.is_relative()) manifest = config_path.parent_path() / manifest;
    ex.data = load_manifest(manifest);
  } else {
    const SyntheticSpec spec = resolve_spec(data_json["synthetic"], seed);
    data_json["synthetic"] = to_json(spec);
    ex.data = generate_synthetic(spec).dataset;
  }
  if (config.contains("classes")) {
    if (!config["classes"].is_array()) throw InvalidConfig("config.classes must be an array of names");
    std::vector<std::string> names;
    for (const auto& n : config["classes"]) {
      if (!n.is_string()) throw InvalidConfig("config.classes must be an array of names");
      names.push_back(n.get<std::string>());
    }
    ex.data = select_classes(ex.data, names);
  }

  Json model = config.value("model", Json::object());
  if (!model.is_object()) throw InvalidConfig("config.model must be an object");
  Json visual = model.value("visual", Json::object());
  if (!visual.is_object()) throw InvalidConfig("config.model.visual must be an object");
  const bool frames = ex.data.visual.kind == VisualKind::frames;
  fill_missing(visual, "kind", frames ? "frames" : "features");
  if (frames) {
    fill_missing(visual, "frame_height", ex.data.visual.frame_height);
    fill_missing(visual, "frame_width", ex.data.visual.frame_width);
  } else {
    fill_missing(visual, "feature_dim", ex.data.visual.feature_dim);
  }
  model["visual"] = visual;
  Json audio = model.value("audio", Json::object());
  if (!audio.is_object()) throw InvalidConfig("config.model.audio must be an object");
  fill_missing(audio, "input_dim", ex.data.audio_dim);
  model["audio"] = audio;
  fill_missing(model, "num_classes", ex.data.class_names.size());

  ex.eval.model = model_config_from_json(model);
  ex.eval.train = train_config_from_json(config.value("train", Json::object()));
  config["model"] = to_json(ex.eval.model);
  config["train"] = to_json(ex.eval.train);
  ex.resolved = std::move(config);
  return ex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio-visual micro-expression fusion: data generation, training and evaluation"};
  app.name("amf");
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", f.config, "JSON config file");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "top-level random seed");
  };
  auto add_threads = [&f](CLI::App* sub) {
    sub->add_option("--threads", f.threads, "folds trained concurrently (results do not change)")
        ->check(CLI::PositiveNumber);
  };
  const std::vector<std::string> modalities{"visual", "audio", "fused"};

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset from a spec");
  add_common(gen, true);
  gen->add_option("--out", f.out, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "train one model on the whole dataset and save a checkpoint");
  add_common(train, true);
  train->add_option("--out", f.out, "output directory")->required();
  train->add_option("--modality", f.modality)->check(CLI::IsMember(modalities));

  auto* eval = app.add_subcommand("eval", "leave-one-subject-out evaluation of one modality");
  add_common(eval, true);
  eval->add_option("--out", f.out, "output directory")->required();
  eval->add_option("--modality", f.modality)->check(CLI::IsMember(modalities));
  add_threads(eval);

  auto* ablate = app.add_subcommand("ablate", "visual, audio and fused LOSO on one fold plan");
  add_common(ablate, true);
  ablate->add_option("--out", f.out, "output directory")->required();
  add_threads(ablate);

  auto* iaa = app.add_subcommand("iaa", "AU agreement between two annotation files");
  iaa->add_option("files", f.iaa_files, "two JSONL annotation files")->required()->expected(2)
      ->check(CLI::ExistingFile);
  iaa->add_option("--out", f.out, "optional output directory");

  auto* stats = app.add_subcommand("stats", "class distribution and annotation validation");
  add_common(stats, false);
  stats->add_option("--manifest", f.manifest, "dataset manifest")->check(CLI::ExistingFile);
  stats->add_option("--annotations", f.annotations, "JSONL annotation file")->check(CLI::ExistingFile);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the fused model");
  add_common(gradcheck, true);
  gradcheck->add_option("--out", f.out, "optional output directory");

  std::vector<const char*> argv{"amf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*gen) return cmd_gen(f, out);
    if (*train) return cmd_train(f, out, err);
    if (*eval) return cmd_eval(f, out, err);
    if (*ablate) return cmd_ablate(f, out, err);
    if (*iaa) return cmd_iaa(f, out);
    if (*stats) return cmd_stats(f, out);
    if (*gradcheck) return cmd_gradcheck(f, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace amf::cli
