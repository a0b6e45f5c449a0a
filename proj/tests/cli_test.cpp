#include "medverify/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "medverify/report.hpp"
#include "medverify/verifier.hpp"

namespace medverify {
namespace {

namespace fs = std::filesystem;

const fs::path kSample = fs::path(MEDVERIFY_SOURCE_DIR) / "data" / "sample";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("medverify_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string posts, profiles;
    int post = 0;
    auto add_user = [&](const std::string& id, const std::string& claim, const std::string& words,
                        int count) {
      for (int k = 0; k < count; ++k) {
        posts += "{\"post_id\":\"p" + std::to_string(++post) + "\",\"user_id\":\"" + id +
                 "\",\"text\":\"" + words + " пацієнт лікування " + std::to_string(k) + "\"}\n";
      }
      profiles += "{\"user_id\":\"" + id + "\",\"claimed_specialty_raw\":\"" + claim + "\"}\n";
    };
    add_user("c1", "Кардіолог", "аритмія тахікардія аналіз", 4);
    add_user("c2", "кардіолог", "тахікардія кардіограма аналіз ліки", 4);
    add_user("c3", "кардіолог", "стенокардія аритмія аналіз", 4);
    add_user("d1", "дерматолог", "дерматит екзема аналіз", 4);
    add_user("d2", "дерматолог", "псоріаз мазь висип", 4);
    add_user("d3", "хірург", "екзема дерматит аналіз", 4);
    add_user("x1", "кардіолог", "аритмія", 2);
    write(dir / "posts.jsonl", posts);
    write(dir / "profiles.jsonl", profiles);
    write(dir / "labels.jsonl",
          "{\"user_id\":\"c1\",\"specialty_id\":\"cardiology\"}\n"
          "{\"user_id\":\"c2\",\"specialty_id\":\"cardiology\"}\n"
          "{\"user_id\":\"d1\",\"specialty_id\":\"dermatology\"}\n"
          "{\"user_id\":\"d2\",\"specialty_id\":\"dermatology\"}\n");
    write(dir / "aliases.json", "{\"кардіолог\": \"cardiology\", \"дерматолог\": \"dermatology\"}\n");
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string p(const char* name) const { return (dir / name).string(); }
  std::string lexicon() const { return (kSample / "markers.json").string(); }

  int train(const std::string& labels, const std::string& out) {
    return cli::run({"medverify", "train", "--posts", p("posts.jsonl"), "--profiles",
                     p("profiles.jsonl"), "--labels", labels, "--lexicon", lexicon(), "--out", out,
                     "--min-tokens", "1", "--min-posts", "1", "--radius-multiplier", "10"});
  }
  int verify(const std::string& lex, const std::string& out, const char* format = "csv") {
    return cli::run({"medverify", "verify", "--posts", p("posts.jsonl"), "--profiles",
                     p("profiles.jsonl"), "--model", p("model.json"), "--lexicon", lex,
                     "--aliases", p("aliases.json"), "--out", out, "--format",
                     format, "--min-tokens", "1", "--min-posts", "3"});
  }

  fs::path dir;
};

TEST_F(Cli, TrainWritesTwoSpecialtyModel) {
  ASSERT_EQ(train(p("labels.jsonl"), p("model.json")), cli::kExitOk);
  const auto model = load_model_file(dir / "model.json");
  EXPECT_EQ(model.matrix.specialty_ids(), (std::vector<std::string>{"cardiology", "dermatology"}));
  EXPECT_EQ(model.matrix.rows(), 5u);
  EXPECT_EQ(model.lexicon_version, "sample-uk-1");
  EXPECT_EQ(model.model_version, content_version(model));
}

TEST_F(Cli, TrainRejectsBadLabels) {
  write(dir / "unknown.jsonl", "{\"user_id\":\"c1\",\"specialty_id\":\"cardiology\"}\n"
                                "{\"user_id\":\"ghost\",\"specialty_id\":\"dermatology\"}\n"
                                "{\"user_id\":\"d1\",\"specialty_id\":\"dermatology\"}\n");
  EXPECT_EQ(train(p("unknown.jsonl"), p("m1.json")), cli::kExitValidation);
  write(dir / "single.jsonl", "{\"user_id\":\"c1\",\"specialty_id\":\"cardiology\"}\n"
                               "{\"user_id\":\"c2\",\"specialty_id\":\"cardiology\"}\n");
  EXPECT_EQ(train(p("single.jsonl"), p("m2.json")), cli::kExitValidation);
  EXPECT_FALSE(fs::exists(dir / "m1.json"));
  EXPECT_FALSE(fs::exists(dir / "m2.json"));
}

TEST_F(Cli, VerifyAndReport) {
  ASSERT_EQ(train(p("labels.jsonl"), p("model.json")), cli::kExitOk);
  ASSERT_EQ(verify(lexicon(), p("verdicts.csv")), cli::kExitOk);
  const auto verdicts = parse_verdicts(slurp(dir / "verdicts.csv"));
  ASSERT_EQ(verdicts.size(), 7u);
  std::map<std::string, Verdict> by_user;
  for (const auto& v : verdicts) by_user[v.user_id] = v;
  EXPECT_EQ(by_user["x1"].outcome, Outcome::kUnverified);
  EXPECT_EQ(by_user["c3"].outcome, Outcome::kVerified);
  EXPECT_EQ(by_user["c3"].predicted_id, "cardiology");
  EXPECT_EQ(by_user["d3"].outcome, Outcome::kIncorrectClaim);
  EXPECT_EQ(by_user["d3"].claimed_raw, "хірург");
  EXPECT_FALSE(by_user["d3"].claimed_id);

  ASSERT_EQ(verify(lexicon(), p("verdicts.json"), "json"), cli::kExitOk);
  EXPECT_EQ(parse_verdicts(slurp(dir / "verdicts.json")), verdicts);

  ASSERT_EQ(cli::run({"medverify", "report", "--verdicts", p("verdicts.csv"), "--format", "json",
                      "--out", p("report.json"), "--generated-at", "2026-01-01T00:00:00Z",
                      "--model", p("model.json")}),
            cli::kExitOk);
  const auto model = load_model_file(dir / "model.json");
  EXPECT_EQ(slurp(dir / "report.json"),
            report_to_json(summarize(verdicts, model.model_version, "2026-01-01T00:00:00Z")));

  ASSERT_EQ(cli::run({"medverify", "report", "--verdicts", p("verdicts.json"), "--out",
                      p("report.txt"), "--generated-at", "2026-01-01T00:00:00Z"}),
            cli::kExitOk);
  const auto text = slurp(dir / "report.txt");
  EXPECT_NE(text.find("total users: 7"), std::string::npos) << text;
  EXPECT_NE(text.find("Unverified  1  14.29%"), std::string::npos) << text;
}

TEST_F(Cli, VerifyRejectsOtherLexiconVersion) {
  ASSERT_EQ(train(p("labels.jsonl"), p("model.json")), cli::kExitOk);
  auto lex = slurp(kSample / "markers.json");
  lex.replace(lex.find("sample-uk-1"), 11, "sample-uk-2");
  write(dir / "markers2.json", lex);
  EXPECT_EQ(verify(p("markers2.json"), p("v.csv")), cli::kExitValidation);
  // The sample alias table names specialties this model does not have.
  EXPECT_EQ(cli::run({"medverify", "verify", "--posts", p("posts.jsonl"), "--model", p("model.json"),
                      "--lexicon", lexicon(), "--aliases", (kSample / "aliases.json").string(),
                      "--out", p("v.csv")}),
            cli::kExitValidation);
}

TEST_F(Cli, MalformedVerdictsFailReport) {
  write(dir / "bad.csv", "not,a,verdict,file\n");
  EXPECT_EQ(cli::run({"medverify", "report", "--verdicts", p("bad.csv"), "--out", p("r.txt")}),
            cli::kExitValidation);
}

TEST_F(Cli, MissingFilesAreIoErrors) {
  EXPECT_EQ(cli::run({"medverify", "report", "--verdicts", p("nope.csv")}), cli::kExitIo);
  EXPECT_EQ(train(p("nope.jsonl"), p("m.json")), cli::kExitIo);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli::run({"medverify"}), cli::kExitValidation);
  EXPECT_EQ(cli::run({"medverify", "verify", "--format", "xml"}), cli::kExitValidation);
  EXPECT_EQ(cli::run({"medverify", "--help"}), cli::kExitOk);
}

TEST_F(Cli, Validate) {
  EXPECT_EQ(cli::run({"medverify", "validate", "--posts", p("posts.jsonl"), "--profiles",
                      p("profiles.jsonl"), "--labels", p("labels.jsonl"), "--lexicon", lexicon(),
                      "--aliases", (kSample / "aliases.json").string()}),
            cli::kExitOk);
  write(dir / "broken.jsonl", "{\"post_id\":\"p1\",\"user_id\":\"u\",\"text\":\"x\"}\nnot json\n");
  EXPECT_EQ(cli::run({"medverify", "validate", "--posts", p("broken.jsonl")}), cli::kExitValidation);
}

TEST_F(Cli, GenIsDeterministic) {
  for (const char* out : {"g1", "g2"}) {
    ASSERT_EQ(cli::run({"medverify", "gen", "--spec", (kSample / "spec.json").string(),
                        "--lexicon", lexicon(), "--out-dir", p(out)}),
              cli::kExitOk);
  }
  for (const char* file : {"posts.jsonl", "profiles.jsonl", "labels.jsonl", "truth.json"}) {
    EXPECT_EQ(slurp(dir / "g1" / file), slurp(dir / "g2" / file)) << file;
    EXPECT_FALSE(slurp(dir / "g1" / file).empty()) << file;
  }
}

}  // namespace
}  // namespace medverify
