#include "medverify/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "medverify/errors.hpp"

namespace medverify {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fixed6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

double round6(double value) { return std::round(value * 1e6) / 1e6; }

std::string percent_text(std::int64_t hundredths) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%lld.%02lld", static_cast<long long>(hundredths / 100),
                static_cast<long long>(hundredths % 100));
  return buffer;
}

void csv_field(std::string& line, const std::optional<std::string>& value) {
  if (!value) return;
  const bool quote = value->empty() || value->find_first_of(",\"\r\n") != std::string::npos;
  if (!quote) {
    line += *value;
    return;
  }
  line += '"';
  for (const char c : *value) {
    if (c == '"') line += '"';
    line += c;
  }
  line += '"';
}

std::optional<std::string> opt_fixed6(const std::optional<double>& value) {
  if (!value) return std::nullopt;
  return fixed6(*value);
}

// RFC 4180 field: `quoted` distinguishes "" (empty string) from an empty field.
struct CsvField {
  std::string value;
  bool quoted = false;
};

std::vector<std::vector<CsvField>> parse_csv(std::string_view source) {
  std::vector<std::vector<CsvField>> rows;
  std::vector<CsvField> row;
  CsvField field;
  std::size_t i = 0;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field = {};
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < source.size()) {
    const char c = source[i];
    if (!field_started && c == '"') {
      field.quoted = true;
      field_started = true;
      ++i;
      for (;;) {
        if (i >= source.size()) throw ValidationError("verdicts CSV: unterminated quoted field");
        if (source[i] == '"') {
          if (i + 1 < source.size() && source[i + 1] == '"') {
            field.value += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field.value += source[i++];
      }
      if (i < source.size() && source[i] != ',' && source[i] != '\n' && source[i] != '\r') {
        throw ValidationError("verdicts CSV: text after closing quote");
      }
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_row();
      i += (c == '\r' && i + 1 < source.size() && source[i + 1] == '\n') ? 2 : 1;
    } else {
      if (field.quoted) throw ValidationError("verdicts CSV: text after closing quote");
      field.value += c;
      field_started = true;
      ++i;
    }
  }
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::optional<std::string> opt_string(const CsvField& field) {
  if (field.value.empty() && !field.quoted) return std::nullopt;
  return field.value;
}

std::optional<double> parse_real(const CsvField& field, const char* column, std::size_t line) {
  if (field.value.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = field.value.data();
  const auto* last = first + field.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ValidationError("verdicts CSV line " + std::to_string(line) + ": bad " + column + " '" +
                          field.value + "'");
  }
  return value;
}

std::uint64_t parse_count(const std::string& text, const char* column, std::size_t line) {
  std::uint64_t value = 0;
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw ValidationError("verdicts line " + std::to_string(line) + ": bad " + column + " '" +
                          text + "'");
  }
  return value;
}

std::vector<Verdict> parse_csv_verdicts(std::string_view source) {
  const auto rows = parse_csv(source);
  if (rows.empty()) throw ValidationError("verdicts CSV is empty");
  std::string header;
  for (std::size_t k = 0; k < rows[0].size(); ++k) {
    if (k > 0) header += ',';
    header += rows[0][k].value;
  }
  if (header != kVerdictCsvHeader) {
    throw ValidationError("verdicts CSV header mismatch: '" + header + "'");
  }
  std::vector<Verdict> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() == 1 && row[0].value.empty() && !row[0].quoted) continue;
    if (row.size() != 10) {
      throw ValidationError("verdicts CSV line " + std::to_string(line) + ": expected 10 fields, got " +
                            std::to_string(row.size()));
    }
    Verdict v;
    v.user_id = row[0].value;
    if (v.user_id.empty()) {
      throw ValidationError("verdicts CSV line " + std::to_string(line) + ": empty user_id");
    }
    const auto outcome = outcome_from_string(row[1].value);
    if (!outcome) {
      throw ValidationError("verdicts CSV line " + std::to_string(line) + ": unknown outcome '" +
                            row[1].value + "'");
    }
    v.outcome = *outcome;
    v.claimed_raw = opt_string(row[2]);
    v.claimed_id = opt_string(row[3]);
    v.predicted_id = opt_string(row[4]);
    v.best_distance = parse_real(row[5], "best_distance", line);
    v.margin = parse_real(row[6], "margin", line);
    v.confidence = parse_real(row[7], "confidence", line);
    v.token_count = parse_count(row[8].value, "token_count", line);
    v.post_count = parse_count(row[9].value, "post_count", line);
    out.push_back(std::move(v));
  }
  return out;
}

ordered_json verdict_json(const Verdict& v) {
  auto opt = [](const auto& value) -> ordered_json {
    if (!value) return nullptr;
    return *value;
  };
  auto opt_real = [](const std::optional<double>& value) -> ordered_json {
    if (!value) return nullptr;
    return round6(*value);
  };
  ordered_json out;
  out["user_id"] = v.user_id;
  out["outcome"] = to_string(v.outcome);
  out["claimed_raw"] = opt(v.claimed_raw);
  out["claimed_id"] = opt(v.claimed_id);
  out["predicted_id"] = opt(v.predicted_id);
  out["best_distance"] = opt_real(v.best_distance);
  out["margin"] = opt_real(v.margin);
  out["confidence"] = opt_real(v.confidence);
  out["token_count"] = v.token_count;
  out["post_count"] = v.post_count;
  return out;
}

std::vector<Verdict> parse_json_verdicts(std::string_view source) {
  const auto doc = ordered_json::parse(source, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw ValidationError("verdicts JSON must be an array of verdict objects");
  }
  std::vector<Verdict> out;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const auto& item = doc[k];
    const std::string where = "verdicts[" + std::to_string(k) + "]";
    try {
      Verdict v;
      v.user_id = item.at("user_id").get<std::string>();
      const auto outcome = outcome_from_string(item.at("outcome").get<std::string>());
      if (!outcome) throw ValidationError(where + ": unknown outcome");
      v.outcome = *outcome;
      auto opt_str = [&](const char* key) -> std::optional<std::string> {
        const auto it = item.find(key);
        if (it == item.end() || it->is_null()) return std::nullopt;
        return it->get<std::string>();
      };
      auto opt_real = [&](const char* key) -> std::optional<double> {
        const auto it = item.find(key);
        if (it == item.end() || it->is_null()) return std::nullopt;
        if (!it->is_number()) throw ValidationError(where + ": '" + key + "' must be a number");
        return it->get<double>();
      };
      v.claimed_raw = opt_str("claimed_raw");
      v.claimed_id = opt_str("claimed_id");
      v.predicted_id = opt_str("predicted_id");
      v.best_distance = opt_real("best_distance");
      v.margin = opt_real("margin");
      v.confidence = opt_real("confidence");
      const auto& tokens = item.at("token_count");
      const auto& posts = item.at("post_count");
      if (!tokens.is_number_unsigned() && !(tokens.is_number_integer() && tokens.get<std::int64_t>() >= 0)) {
        throw ValidationError(where + ": token_count must be a non-negative integer");
      }
      if (!posts.is_number_unsigned() && !(posts.is_number_integer() && posts.get<std::int64_t>() >= 0)) {
        throw ValidationError(where + ": post_count must be a non-negative integer");
      }
      v.token_count = tokens.get<std::uint64_t>();
      v.post_count = posts.get<std::uint64_t>();
      if (v.user_id.empty()) throw ValidationError(where + ": empty user_id");
      out.push_back(std::move(v));
    } catch (const ordered_json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::int64_t percent_hundredths(std::uint64_t count, std::uint64_t total) {
  if (total == 0) return 0;
  const unsigned __int128 scaled = static_cast<unsigned __int128>(count) * 20000u + total;
  return static_cast<std::int64_t>(scaled / (static_cast<unsigned __int128>(total) * 2u));
}

DistributionReport summarize(std::span<const Verdict> verdicts, std::string model_version,
                             std::string generated_at) {
  DistributionReport report;
  report.model_version = std::move(model_version);
  report.generated_at = std::move(generated_at);
  report.total_users = verdicts.size();
  for (const Outcome o : kAllOutcomes) report.counts[o] = 0;
  for (const auto& v : verdicts) {
    ++report.counts[v.outcome];
    if (v.outcome == Outcome::kVerified && v.predicted_id) {
      ++report.per_specialty_verified[*v.predicted_id];
    }
  }
  for (const Outcome o : kAllOutcomes) {
    report.percentages[o] =
        static_cast<double>(percent_hundredths(report.counts[o], report.total_users)) / 100.0;
  }
  return report;
}

void emit_verdicts(std::span<const Verdict> verdicts, VerdictFormat format, std::ostream& sink) {
  if (format == VerdictFormat::kJson) {
    ordered_json out = ordered_json::array();
    for (const auto& v : verdicts) out.push_back(verdict_json(v));
    sink << out.dump(2) << '\n';
  } else {
    sink << kVerdictCsvHeader << '\n';
    for (const auto& v : verdicts) {
      std::string line;
      csv_field(line, v.user_id);
      line += ',';
      line += to_string(v.outcome);
      line += ',';
      csv_field(line, v.claimed_raw);
      line += ',';
      csv_field(line, v.claimed_id);
      line += ',';
      csv_field(line, v.predicted_id);
      line += ',';
      csv_field(line, opt_fixed6(v.best_distance));
      line += ',';
      csv_field(line, opt_fixed6(v.margin));
      line += ',';
      csv_field(line, opt_fixed6(v.confidence));
      line += ',';
      line += std::to_string(v.token_count);
      line += ',';
      line += std::to_string(v.post_count);
      sink << line << '\n';
    }
  }
  sink.flush();
  if (!sink) throw IoError("failed to write verdicts");
}

std::vector<Verdict> parse_verdicts(std::string_view source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && source[first] == '[') return parse_json_verdicts(source);
  return parse_csv_verdicts(source);
}

std::string render_text(const DistributionReport& report) {
  std::string out;
  out += "Verification outcomes\n";
  out += "model: " + (report.model_version.empty() ? std::string("-") : report.model_version) + "\n";
  out += "generated: " + (report.generated_at.empty() ? std::string("-") : report.generated_at) + "\n";
  out += "total users: " + std::to_string(report.total_users) + "\n";
  out += "\nOutcome  Count  Percent\n";
  for (const Outcome o : kAllOutcomes) {
    const auto count = report.counts.contains(o) ? report.counts.at(o) : 0;
    const double pct = report.percentages.contains(o) ? report.percentages.at(o) : 0.0;
    out += std::string(to_string(o)) + "  " + std::to_string(count) + "  " +
           percent_text(std::llround(pct * 100.0)) + "%\n";
  }
  out += "\nVerified by specialty\n";
  if (report.per_specialty_verified.empty()) out += "(none)\n";
  for (const auto& [specialty, count] : report.per_specialty_verified) {
    out += specialty + "  " + std::to_string(count) + "\n";
  }
  return out;
}

std::string report_to_json(const DistributionReport& report) {
  ordered_json counts = ordered_json::object();
  ordered_json percentages = ordered_json::object();
  for (const Outcome o : kAllOutcomes) {
    const std::string name(to_string(o));
    counts[name] = report.counts.contains(o) ? report.counts.at(o) : 0;
    percentages[name] = report.percentages.contains(o) ? report.percentages.at(o) : 0.0;
  }
  ordered_json per_specialty = ordered_json::object();
  for (const auto& [specialty, count] : report.per_specialty_verified) per_specialty[specialty] = count;
  ordered_json out;
  out["total_users"] = report.total_users;
  out["counts"] = std::move(counts);
  out["percentages"] = std::move(percentages);
  out["per_specialty_verified"] = std::move(per_specialty);
  out["generated_at"] = report.generated_at;
  out["model_version"] = report.model_version;
  return out.dump(2) + "\n";
}

}  // namespace medverify
