#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medverify/verifier.hpp"

namespace medverify {

struct DistributionReport {
  std::uint64_t total_users = 0;
  std::map<Outcome, std::uint64_t> counts;   // every outcome present
  std::map<Outcome, double> percentages;     // of total, rounded half-up to 0.01
  std::map<std::string, std::uint64_t> per_specialty_verified;
  std::string generated_at;
  std::string model_version;
};

/// Half-up rounding of 100 * count / total to hundredths, in exact integer
/// arithmetic. Returns hundredths of a percent.
std::int64_t percent_hundredths(std::uint64_t count, std::uint64_t total);

DistributionReport summarize(std::span<const Verdict> verdicts, std::string model_version = {},
                             std::string generated_at = {});

enum class VerdictFormat { kCsv, kJson };

inline constexpr std::string_view kVerdictCsvHeader =
    "user_id,outcome,claimed_raw,claimed_id,predicted_id,best_distance,margin,confidence,"
    "token_count,post_count";

/// Throws IoError when the sink fails.
void emit_verdicts(std::span<const Verdict> verdicts, VerdictFormat format, std::ostream& sink);

/// Parses either format (detected from the first non-space byte). Throws
/// ValidationError on malformed input.
std::vector<Verdict> parse_verdicts(std::string_view source);

std::string render_text(const DistributionReport& report);
std::string report_to_json(const DistributionReport& report);

}  // namespace medverify
