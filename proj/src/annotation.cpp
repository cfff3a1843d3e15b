#include "amf/annotation.hpp"

#include <fstream>
#include <map>
#include <regex>

#include "amf/errors.hpp"
#include "amf/json_config.hpp"

namespace amf {

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::positive: return "Positive";
    case Emotion::negative: return "Negative";
    case Emotion::surprise: return "Surprise";
    case Emotion::others: return "Others";
  }
  return "?";
}

Emotion parse_emotion(std::string_view name) {
  for (Emotion e : {Emotion::positive, Emotion::negative, Emotion::surprise, Emotion::others}) {
    if (name == to_string(e)) return e;
  }
  throw MalformedFile("unknown emotion '" + std::string(name) +
                      "' (Positive, Negative, Surprise, Others)");
}

bool is_au_code(std::string_view code) {
  static const std::regex pattern("AU[0-9]{1,3}");
  return std::regex_match(code.begin(), code.end(), pattern);
}

std::vector<Violation> validate_annotation(const AnnotationRecord& r) {
  std::vector<Violation> out;
  if (r.clip_id.empty()) out.push_back({"clip_id", "clip_id is empty"});
  if (r.subject_id.empty()) out.push_back({"subject_id", "subject_id is empty"});
  if (r.onset_frame < 0 || r.apex_frame < 0 || r.offset_frame < 0) {
    out.push_back({"frames", "frame indices must be non-negative"});
  }
  if (r.apex_frame < r.onset_frame) {
    out.push_back({"apex_frame", "apex " + std::to_string(r.apex_frame) + " precedes onset " +
                                     std::to_string(r.onset_frame)});
  }
  if (r.offset_frame < r.apex_frame) {
    out.push_back({"offset_frame", "offset " + std::to_string(r.offset_frame) +
                                       " precedes apex " + std::to_string(r.apex_frame)});
  }
  if (!(r.fps > 0)) {
    out.push_back({"fps", "fps must be positive"});
  } else {
    // Compare frame counts, not a quotient, so 0.5 s exactly stays inclusive.
    const double frames = static_cast<double>(r.offset_frame - r.onset_frame);
    if (frames > kMaxMicroExpressionSeconds * r.fps) {
      out.push_back({"duration", "duration " + std::to_string(frames / r.fps) +
                                     " s exceeds 0.5 s"});
    }
  }
  if (r.au_codes.empty()) out.push_back({"au_codes", "no action units coded"});
  for (const auto& code : r.au_codes) {
    if (!is_au_code(code)) out.push_back({"au_codes", "malformed AU code '" + code + "'"});
  }
  return out;
}

namespace {

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

}  // namespace

double compute_iaa(const std::set<std::string>& a, const std::set<std::string>& b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(intersection_size(a, b)) / static_cast<double>(total);
}

AgreementSummary compute_iaa(std::span<const AnnotationRecord> first,
                             std::span<const AnnotationRecord> second) {
  std::map<std::string, const AnnotationRecord*> by_id;
  for (const auto& r : second) by_id[r.clip_id] = &r;

  std::vector<std::string> unmatched;
  std::set<std::string> seen;
  for (const auto& r : first) {
    seen.insert(r.clip_id);
    if (!by_id.count(r.clip_id)) unmatched.push_back(r.clip_id);
  }
  for (const auto& r : second) {
    if (!seen.count(r.clip_id)) unmatched.push_back(r.clip_id);
  }
  if (!unmatched.empty()) {
    std::string ids;
    for (const auto& id : unmatched) ids += (ids.empty() ? "" : ", ") + id;
    throw UnmatchedClips("clips present in only one annotation file: " + ids);
  }

  AgreementSummary summary;
  std::size_t agreed = 0, coded = 0;
  for (const auto& a : first) {
    const AnnotationRecord& b = *by_id.at(a.clip_id);
    ClipAgreement clip{a.clip_id, compute_iaa(a.au_codes, b.au_codes),
                       a.au_codes.empty() && b.au_codes.empty()};
    summary.empty_clips += clip.both_empty;
    summary.mean_per_clip += clip.r;
    agreed += intersection_size(a.au_codes, b.au_codes);
    coded += a.au_codes.size() + b.au_codes.size();
    summary.clips.push_back(std::move(clip));
  }
  if (!summary.clips.empty()) summary.mean_per_clip /= static_cast<double>(summary.clips.size());
  summary.pooled = coded == 0 ? 1.0 : 2.0 * static_cast<double>(agreed) / static_cast<double>(coded);
  return summary;
}

namespace {

AnnotationRecord record_from_json(const Json& j) {
  check_known_keys(j, {"clip_id", "subject_id", "onset_frame", "apex_frame", "offset_frame", "fps",
                       "au_codes", "emotion"},
                   "annotation");
  AnnotationRecord r;
  r.clip_id = j.at("clip_id").get<std::string>();
  r.subject_id = j.at("subject_id").get<std::string>();
  r.onset_frame = j.at("onset_frame").get<std::int64_t>();
  r.apex_frame = j.at("apex_frame").get<std::int64_t>();
  r.offset_frame = j.at("offset_frame").get<std::int64_t>();
  r.fps = j.at("fps").get<double>();
  for (const auto& code : j.at("au_codes")) r.au_codes.insert(code.get<std::string>());
  r.emotion = parse_emotion(j.at("emotion").get<std::string>());
  return r;
}

}  // namespace

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("annotation file not found: '" + path.string() + "'");
  std::vector<AnnotationRecord> out;
  std::set<std::string> ids;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      out.push_back(record_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedFile(where + ": " + e.what());
    } catch (const InputError& e) {
      throw MalformedFile(where + ": " + e.what());
    }
    if (!ids.insert(out.back().clip_id).second) {
      throw MalformedFile(where + ": duplicate clip_id '" + out.back().clip_id + "'");
    }
  }
  return out;
}

void write_annotations(const std::filesystem::path& path, std::span<const AnnotationRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& r : records) {
    Json j;
    j["clip_id"] = r.clip_id;
    j["subject_id"] = r.subject_id;
    j["onset_frame"] = r.onset_frame;
    j["apex_frame"] = r.apex_frame;
    j["offset_frame"] = r.offset_frame;
    j["fps"] = r.fps;
    j["au_codes"] = r.au_codes;
    j["emotion"] = to_string(r.emotion);
    out << j.dump() << '\n';
  }
}

}  // namespace amf
