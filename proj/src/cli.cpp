#include "medverify/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "medverify/corpus.hpp"
#include "medverify/errors.hpp"
#include "medverify/lexicon.hpp"
#include "medverify/pipeline.hpp"
#include "medverify/report.hpp"
#include "medverify/synthgen.hpp"
#include "medverify/verifier.hpp"

namespace medverify::cli {

namespace fs = std::filesystem;

namespace {

spdlog::logger& logger() {
  static auto instance = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_st>();
    auto log = std::make_shared<spdlog::logger>("medverify", sink);
    log->set_pattern("[%l] %v");
    return log;
  }();
  return *instance;
}

void configure_logging() {
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("MEDVERIFY_LOG_LEVEL")) {
    level = spdlog::level::from_str(env);
  }
  logger().set_level(level);
}

void require_input(const std::string& path, const char* what) {
  if (path.empty()) return;
  if (!fs::exists(path)) throw IoError(std::string(what) + " not found: " + path);
}

std::string read_all(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(std::string("cannot read ") + what + " " + path);
  return buffer.str();
}

// Writes to `path`, or stdout when path is empty or "-".
template <typename Writer>
void write_output(const std::string& path, Writer writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
    std::cout.flush();
    if (!std::cout) throw IoError("failed to write to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed to write " + path);
}

void log_issues(const std::string& file, const std::vector<IngestIssue>& issues) {
  for (const auto& issue : issues) {
    logger().warn("{}:{}: {}: {}", file, issue.line, to_string(issue.kind), issue.message);
  }
}

Corpus load_corpus(const std::string& posts_path, const std::string& profiles_path,
                   const std::string& community_id) {
  auto posts = ingest_posts_file(posts_path);
  log_issues(posts_path, posts.issues);
  IngestResult<UserProfile> profiles;
  if (!profiles_path.empty()) {
    profiles = ingest_profiles_file(profiles_path);
    log_issues(profiles_path, profiles.issues);
  }
  logger().info("ingested {} posts, {} profiles", posts.records.size(), profiles.records.size());
  return build_tracks(std::move(posts.records), std::move(profiles.records), community_id);
}

struct TrainArgs {
  std::string posts, profiles, labels, lexicon, out, community_id = "community";
  TrainParams params;
};

int cmd_train(const TrainArgs& args) {
  for (const auto& [path, what] : {std::pair{args.posts, "posts file"}, {args.profiles, "profiles file"},
                                   {args.labels, "labels file"}, {args.lexicon, "lexicon"}}) {
    require_input(path, what);
  }
  const auto lexicon = load_lexicon_file(args.lexicon);
  const auto corpus = load_corpus(args.posts, args.profiles, args.community_id);
  const auto labels = ingest_labels_file(args.labels);
  if (!labels.issues.empty()) {
    log_issues(args.labels, labels.issues);
    throw ValidationError("labels file has " + std::to_string(labels.issues.size()) +
                          " invalid line(s)");
  }
  const auto result = train_model(corpus, labels.records, lexicon, args.params);
  for (const auto& warning : result.warnings) logger().warn("{}", warning);
  write_output(args.out, [&](std::ostream& os) { os << model_to_json(result.model); });
  logger().info("trained model {} on {} users, {} specialties, {} indicators",
                result.model.model_version, result.training.size(), result.model.matrix.cols(),
                result.model.matrix.rows());
  return kExitOk;
}

struct VerifyArgs {
  std::string posts, profiles, model, lexicon, aliases, out, format = "csv",
      community_id = "community";
  Thresholds thresholds;
};

int cmd_verify(const VerifyArgs& args) {
  for (const auto& [path, what] : {std::pair{args.posts, "posts file"}, {args.profiles, "profiles file"},
                                   {args.model, "model"}, {args.lexicon, "lexicon"},
                                   {args.aliases, "alias table"}}) {
    require_input(path, what);
  }
  const auto model = load_model_file(args.model);
  const auto lexicon = load_lexicon_file(args.lexicon);
  const AliasTable aliases = args.aliases.empty() ? AliasTable{} : load_aliases_file(args.aliases);
  check_compatible(model, lexicon, aliases);
  const auto corpus = load_corpus(args.posts, args.profiles, args.community_id);
  const auto verdicts = verify_corpus(corpus, model, lexicon, aliases, args.thresholds);
  const auto format = args.format == "json" ? VerdictFormat::kJson : VerdictFormat::kCsv;
  write_output(args.out, [&](std::ostream& os) { emit_verdicts(verdicts, format, os); });
  logger().info("wrote {} verdicts", verdicts.size());
  return kExitOk;
}

struct ReportArgs {
  std::string verdicts, format = "text", out, model, generated_at;
};

std::string default_generated_at() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long seconds = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') return format_iso8601(seconds);
    throw ValidationError(std::string("SOURCE_DATE_EPOCH is not an integer: ") + epoch);
  }
  const auto now = std::chrono::system_clock::now();
  return format_iso8601(
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

int cmd_report(const ReportArgs& args) {
  require_input(args.verdicts, "verdicts file");
  require_input(args.model, "model");
  const auto verdicts = parse_verdicts(read_all(args.verdicts, "verdicts file"));
  std::string model_version;
  if (!args.model.empty()) model_version = load_model_file(args.model).model_version;
  if (!args.generated_at.empty() && !parse_iso8601(args.generated_at)) {
    throw ValidationError("--generated-at is not an ISO-8601 instant: " + args.generated_at);
  }
  const std::string generated_at =
      args.generated_at.empty() ? default_generated_at() : args.generated_at;
  const auto report = summarize(verdicts, model_version, generated_at);
  write_output(args.out, [&](std::ostream& os) {
    os << (args.format == "json" ? report_to_json(report) : render_text(report));
  });
  return kExitOk;
}

struct GenArgs {
  std::string spec, lexicon, out_dir;
};

int cmd_gen(const GenArgs& args) {
  require_input(args.spec, "community spec");
  require_input(args.lexicon, "lexicon");
  const auto spec = synth::load_spec_file(args.spec);
  const auto lexicon = load_lexicon_file(args.lexicon);
  const auto community = synth::generate(spec, lexicon);
  synth::write_community(community, args.out_dir);
  logger().info("generated {} users, {} posts, {} labels into {}", community.profiles.size(),
                community.posts.size(), community.labels.size(), args.out_dir);
  return kExitOk;
}

struct ValidateArgs {
  std::string posts, profiles, labels, lexicon, model, aliases;
};

int cmd_validate(const ValidateArgs& args) {
  std::size_t problems = 0;
  auto report_issues = [&](const std::string& file, const std::vector<IngestIssue>& issues) {
    for (const auto& issue : issues) {
      std::cout << file << ':' << issue.line << ": " << to_string(issue.kind) << ": "
                << issue.message << '\n';
    }
    problems += issues.size();
    std::cout << file << ": " << issues.size() << " issue(s)\n";
  };
  auto report_error = [&](const std::string& file, const ValidationError& e) {
    for (const auto& v : e.violations()) std::cout << file << ": " << v << '\n';
    problems += e.violations().size();
  };
  for (const auto& [path, what] : {std::pair{args.posts, "posts file"}, {args.profiles, "profiles file"},
                                   {args.labels, "labels file"}, {args.lexicon, "lexicon"},
                                   {args.model, "model"}, {args.aliases, "alias table"}}) {
    require_input(path, what);
  }
  if (!args.posts.empty()) report_issues(args.posts, ingest_posts_file(args.posts).issues);
  if (!args.profiles.empty()) report_issues(args.profiles, ingest_profiles_file(args.profiles).issues);
  if (!args.labels.empty()) report_issues(args.labels, ingest_labels_file(args.labels).issues);

  std::optional<MarkerLexicon> lexicon;
  if (!args.lexicon.empty()) {
    try {
      lexicon = load_lexicon_file(args.lexicon);
      std::cout << args.lexicon << ": ok (" << lexicon->groups().size() << " groups, "
                << lexicon->markers().size() << " markers)\n";
    } catch (const ValidationError& e) {
      report_error(args.lexicon, e);
    }
  }
  std::optional<ReferenceModel> model;
  if (!args.model.empty()) {
    try {
      model = load_model_file(args.model);
      std::cout << args.model << ": ok (" << model->matrix.rows() << " x " << model->matrix.cols()
                << ")\n";
    } catch (const ValidationError& e) {
      report_error(args.model, e);
    }
  }
  AliasTable aliases;
  if (!args.aliases.empty()) {
    try {
      aliases = load_aliases_file(args.aliases);
    } catch (const ValidationError& e) {
      report_error(args.aliases, e);
    }
  }
  if (model && lexicon) {
    try {
      check_compatible(*model, *lexicon, aliases);
    } catch (const ValidationError& e) {
      report_error(args.model, e);
    }
  }
  std::cout << (problems == 0 ? "valid" : "invalid") << ": " << problems << " problem(s)\n";
  return problems == 0 ? kExitOk : kExitValidation;
}

constexpr const char* kFormatsHelp = R"(File formats:
  posts.jsonl     one JSON object per line: post_id, user_id, text (required);
                  timestamp (ISO-8601), section (optional)
  profiles.jsonl  user_id (required); username, claimed_specialty_raw,
                  registered_at (optional)
  labels.jsonl    user_id, specialty_id (trusted training sample)
  markers.json    {"lexicon_version", "groups":[{"group_id","label"}],
                   "markers":[{"marker_id","group_id","kind","pattern",
                   "case_sensitive"}]}, kind in literal_token|phrase|regex
  aliases.json    {"<claim text>": "<specialty_id>", ...}
  model.json      written by `train`, read by `verify`
  spec.json       synthetic community description read by `gen`

Exit codes: 0 ok, 1 validation failure, 2 I/O failure.
Log level: MEDVERIFY_LOG_LEVEL=trace|debug|info|warn|error|off (stderr).)";

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Verify claimed medical specialties of community users from their posts"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Build a reference model from a labeled sample");
  train_cmd->add_option("--posts", train.posts, "posts.jsonl")->required();
  train_cmd->add_option("--profiles", train.profiles, "profiles.jsonl");
  train_cmd->add_option("--labels", train.labels, "labels.jsonl (trusted users)")->required();
  train_cmd->add_option("--lexicon", train.lexicon, "markers.json")->required();
  train_cmd->add_option("--out", train.out, "model.json to write")->required();
  train_cmd->add_option("--community-id", train.community_id, "community identifier")
      ->capture_default_str();
  train_cmd->add_option("--epsilon", train.params.epsilon, "within-class variance floor")
      ->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--cap", train.params.cap, "ceiling on indicator scores")
      ->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--radius-multiplier", train.params.thresholds.radius_multiplier,
                        "acceptance radius = mean + k * stddev of member distances")
      ->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--min-tokens", train.params.thresholds.min_tokens,
                        "minimum tokens for a training user")->capture_default_str();
  train_cmd->add_option("--min-posts", train.params.thresholds.min_posts,
                        "minimum posts for a training user")->capture_default_str();

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Categorize every user against a model");
  verify_cmd->add_option("--posts", verify.posts, "posts.jsonl")->required();
  verify_cmd->add_option("--profiles", verify.profiles, "profiles.jsonl");
  verify_cmd->add_option("--model", verify.model, "model.json")->required();
  verify_cmd->add_option("--lexicon", verify.lexicon, "markers.json")->required();
  verify_cmd->add_option("--aliases", verify.aliases, "aliases.json");
  verify_cmd->add_option("--out", verify.out, "verdict file (default: stdout)");
  verify_cmd->add_option("--format", verify.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  verify_cmd->add_option("--community-id", verify.community_id, "community identifier")
      ->capture_default_str();
  verify_cmd->add_option("--min-tokens", verify.thresholds.min_tokens,
                         "fewer tokens => Unverified")->capture_default_str();
  verify_cmd->add_option("--min-posts", verify.thresholds.min_posts,
                         "fewer posts => Unverified")->capture_default_str();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Summarize verdicts into outcome distributions");
  report_cmd->add_option("--verdicts", report.verdicts, "verdicts.csv or verdicts.json")->required();
  report_cmd->add_option("--format", report.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  report_cmd->add_option("--out", report.out, "report file (default: stdout)");
  report_cmd->add_option("--model", report.model, "model.json, for the model_version field");
  report_cmd->add_option("--generated-at", report.generated_at,
                         "ISO-8601 timestamp (default: SOURCE_DATE_EPOCH, else now)");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a labeled synthetic community");
  gen_cmd->add_option("--spec", gen.spec, "spec.json")->required();
  gen_cmd->add_option("--lexicon", gen.lexicon, "markers.json providing literal markers")->required();
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Lint input files");
  validate_cmd->add_option("--posts", validate.posts, "posts.jsonl");
  validate_cmd->add_option("--profiles", validate.profiles, "profiles.jsonl");
  validate_cmd->add_option("--labels", validate.labels, "labels.jsonl");
  validate_cmd->add_option("--lexicon", validate.lexicon, "markers.json");
  validate_cmd->add_option("--model", validate.model, "model.json");
  validate_cmd->add_option("--aliases", validate.aliases, "aliases.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*verify_cmd) return cmd_verify(verify);
    if (*report_cmd) return cmd_report(report);
    if (*gen_cmd) return cmd_gen(gen);
    if (*validate_cmd) return cmd_validate(validate);
  } catch (const IoError& e) {
    logger().error("{}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    logger().error("{}", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}

int run(std::vector<std::string> args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (auto& arg : args) argv.push_back(arg.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(args.size()), argv.data());
}

}  // namespace medverify::cli
