#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amf {

enum class Emotion { positive, negative, surprise, others };

std::string_view to_string(Emotion e);
/// Accepts "Positive", "Negative", "Surprise", "Others".
Emotion parse_emotion(std::string_view name);

/// Longest accepted onset-to-offset span, inclusive.
inline constexpr double kMaxMicroExpressionSeconds = 0.5;

struct AnnotationRecord {
  std::string clip_id;
  std::string subject_id;
  std::int64_t onset_frame = 0;
  std::int64_t apex_frame = 0;
  std::int64_t offset_frame = 0;
  double fps = 0;
  std::set<std::string> au_codes;
  Emotion emotion = Emotion::others;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Every broken invariant of the record; empty means valid.
std::vector<Violation> validate_annotation(const AnnotationRecord& record);

/// True for AU identifiers like "AU4" or "AU50".
bool is_au_code(std::string_view code);

/// Dice overlap 2|A∩B| / (|A|+|B|); 1 when both sets are empty.
double compute_iaa(const std::set<std::string>& a, const std::set<std::string>& b);

struct ClipAgreement {
  std::string clip_id;
  double r = 0;
  bool both_empty = false;
};

struct AgreementSummary {
  std::vector<ClipAgreement> clips;  // in the first file's order
  double mean_per_clip = 0;          // average of per-clip r
  double pooled = 0;                 // 2·Σ|A∩B| / Σ(|A|+|B|) over all clips
  std::size_t empty_clips = 0;
};

/// Aligns two annotators' records by clip_id. Throws UnmatchedClips listing
/// ids present in only one side.
AgreementSummary compute_iaa(std::span<const AnnotationRecord> first,
                             std::span<const AnnotationRecord> second);

/// One JSON object per line. Throws MissingFile / MalformedFile with the line number.
std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, std::span<const AnnotationRecord> records);

}  // namespace amf
