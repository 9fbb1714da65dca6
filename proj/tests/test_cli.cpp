#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>

#include "a2p/graphemes.hpp"
#include "a2p/metrics.hpp"
#include "a2p/pipeline.hpp"
#include "a2p/util.hpp"
#include "synthetic_durations.hpp"
#include "synthetic_language.hpp"

using namespace a2p;
namespace fs = std::filesystem;

namespace {

const fs::path kData = A2P_DATA_DIR;
const fs::path kCorpus = kData / "fixtures" / "sample_corpus.tsv";

struct Result {
  int code;
  std::string out;
};

// Runs the tool through the shell; stderr is discarded.
Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(A2P_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return {-1, ""};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("a2p_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& extra = "") {
  std::vector<std::pair<std::string, PhoneSequence>> utts;
  for (const auto& r : pipeline::load_corpus(kCorpus, scriptcore::Language::hindi)) {
    utts.emplace_back(r.id, graphemes::segment_uni(graphemes::normalize_ascii(r.ascii)));
  }
  write_file(dir / "durations.tsv",
             synth::duration_records(utts, neural::FeatureSpec::for_inventory(graphemes::uni_inventory()), 11));
  write_file(dir / "run.ini", "[pipeline]\nscheme = uni\ncorpus = " + kCorpus.string() +
                                  "\noutput = out\ndurations = durations.tsv\nseed = 2\n" + extra +
                                  "[split]\ntrain = 0.5\ndev = 0.25\ntest = 0.25\n"
                                  "[train]\nhidden_layers = 2\nwidth = 16\nbatch_size = 8\nmax_epochs = 3\n");
  return dir / "run.ini";
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("pipeline run --help").code, 0);
  EXPECT_NE(cli("pipeline run --help").out.find("ASCII2PHONE_SEED"), std::string::npos);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("segment --no-such-flag").code, 1);
  EXPECT_EQ(cli("g2p train --lexicon x --order 9 -o y").code, 1);
}

TEST(Cli, ToCpsAndSegment) {
  auto dir = scratch("seg");
  write_file(dir / "native.txt", "मेरा नाम\n");
  auto r = cli("to-cps --phones " + (dir / "native.txt").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "m ei r aa | n aa m a\n");

  write_file(dir / "in.txt", "Mera naam\n");
  r = cli("segment --scheme multi " + (dir / "in.txt").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "sil m e r a | n aa m sil\n");
  write_file(dir / "bad.txt", "caf\xc3\xa9\n");
  EXPECT_EQ(cli("segment " + (dir / "bad.txt").string()).code, 2);
  EXPECT_EQ(cli("segment " + (dir / "missing.txt").string()).code, 1);
}

TEST(Cli, G2PTrainApplySweep) {
  auto dir = scratch("g2p");
  const auto lexicon = synth::SyntheticLanguage(3).lexicon(300, 4);
  write_file(dir / "lex.tsv", lexicon.serialize());
  ASSERT_EQ(cli("g2p train --lexicon " + (dir / "lex.tsv").string() + " --order 3 -o " + (dir / "m.g2p").string()).code, 0);
  write_file(dir / "words.txt", lexicon.entries()[0].word + "\n");
  auto r = cli("g2p apply --model " + (dir / "m.g2p").string() + " " + (dir / "words.txt").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind(lexicon.entries()[0].word + "\t", 0), 0u);
  r = cli("g2p sweep --orders 1,2 --lexicon " + (dir / "lex.tsv").string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("order"), std::string::npos);
  EXPECT_EQ(cli("g2p sweep --orders 1,x --lexicon " + (dir / "lex.tsv").string()).code, 1);
}

TEST(Cli, PipelineRunIsByteIdenticalAndExitCodes) {
  auto dir = scratch("pipe");
  const auto cfg = write_config(dir);
  ASSERT_EQ(cli("pipeline run --config " + cfg.string()).code, 0);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(dir / "out")) {
    if (e.path().filename() != "manifest.json") first[e.path().filename()] = read_file(e.path());
  }
  ASSERT_EQ(first.size(), 8u);
  ASSERT_EQ(cli("pipeline run --config " + cfg.string()).code, 0);
  for (const auto& [name, text] : first) EXPECT_EQ(read_file(dir / "out" / name), text) << name;

  // Partial runs over existing outputs.
  EXPECT_EQ(cli("pipeline run --config " + cfg.string() + " --from predict --to eval").code, 0);
  EXPECT_EQ(cli("pipeline run --config " + cfg.string() + " --from bogus").code, 1);

  // Unknown key: configuration error.
  write_file(dir / "typo.ini", read_file(cfg) + "[g2p]\nordr = 3\n");
  EXPECT_EQ(cli("pipeline run --config " + (dir / "typo.ini").string()).code, 1);

  // References that disagree with the phones: data error.
  write_file(dir / "durations.tsv", "hi_0001\tsil\t4\t4\t4\t4\t4\t20\t20\t20\n");
  EXPECT_EQ(cli("pipeline run --config " + cfg.string()).code, 2);
}

TEST(Cli, SeedEnvironmentChangesRunId) {
  auto dir = scratch("seed");
  const auto cfg = write_config(dir);
  ASSERT_EQ(cli("pipeline run --config " + cfg.string() + " --to phones").code, 0);
  const auto a = pipeline::read_provenance(read_file(dir / "out" / "phones.tsv"));
  ASSERT_EQ(cli("pipeline run --config " + cfg.string() + " --to phones", "ASCII2PHONE_SEED=99").code, 0);
  const auto b = pipeline::read_provenance(read_file(dir / "out" / "phones.tsv"));
  EXPECT_NE(a, b);
}

TEST(Cli, DnnAndEvalDurations) {
  auto dir = scratch("dnn");
  const auto cfg = write_config(dir);
  ASSERT_EQ(cli("pipeline run --config " + cfg.string() + " --to features").code, 0);
  write_file(dir / "train.ini", "hidden_layers = 1\nwidth = 8\nmax_epochs = 2\nbatch_size = 4\n");
  const auto out = dir / "out";
  ASSERT_EQ(cli("dnn train-duration --config " + (dir / "train.ini").string() + " " + (out / "train.features").string() +
                " " + (out / "dev.features").string() + " " + (dir / "d.net").string())
                .code,
            0);
  ASSERT_EQ(cli("dnn predict " + (dir / "d.net").string() + " " + (out / "test.features").string() + " " +
                (dir / "pred.txt").string())
                .code,
            0);
  const auto rows = split(read_file(dir / "pred.txt"), '\n');
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(split_whitespace(rows[1]).size(), 9u);

  write_file(dir / "bad.ini", "widht = 8\n");
  EXPECT_EQ(cli("dnn train-duration --config " + (dir / "bad.ini").string() + " " + (out / "train.features").string() +
                " " + (out / "dev.features").string() + " " + (dir / "x.net").string())
                .code,
            1);

  // Reference against itself.
  auto r = cli("eval durations --ref " + (dir / "durations.tsv").string() + " --pred " +
               (dir / "durations.tsv").string() + " --method UGM");
  ASSERT_EQ(r.code, 0);
  auto report = metrics::parse_duration_report(r.out);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_DOUBLE_EQ(report[0].rmse_frames, 0.0);
  EXPECT_NEAR(report[0].pearson_r, 1.0, 1e-12);
}

TEST(Cli, EvalObjectiveAndMushra) {
  auto dir = scratch("eval");
  // Layout mcc=2, bap=1, no deltas: columns mcc0 mcc1 bap0 lf0 vuv.
  write_file(dir / "ref.txt", "0 1 0 4.60517 1\n0 1 0 4.60517 1\n0 1 0 0 0\n");
  write_file(dir / "pred.txt", "9 2 0 4.60517 1\n9 1 0 4.60517 1\n0 1 0 0 1\n");
  auto r = cli("eval objective --layout mcc=2,bap=1,nodeltas --mcd-first 1 --mcd-last 1 --ref " +
               (dir / "ref.txt").string() + " --pred " + (dir / "pred.txt").string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto rows = metrics::parse_objective_report(r.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].mcd_db, (10.0 / std::log(10.0)) * std::sqrt(2.0) / 3.0, 1e-5);
  EXPECT_NEAR(rows[0].vuv_error_pct, 100.0 / 3.0, 1e-5);  // report keeps 6 decimals
  EXPECT_NEAR(rows[0].f0_rmse_hz, 0.0, 1e-9);

  std::string scores = "listener\tsentence\tsystem\tscore\n";
  const char* systems[] = {"BMK", "UGM", "MGM"};
  for (int l = 0; l < 3; ++l)
    for (int s = 0; s < 4; ++s)
      for (int k = 0; k < 3; ++k)
        scores += "L" + std::to_string(l) + "\tS" + std::to_string(s) + "\t" + systems[k] + "\t" +
                  std::to_string(k == 0 ? 100 : 60 - 10 * k + s + l) + "\n";
  write_file(dir / "scores.tsv", scores);
  ASSERT_EQ(cli("eval mushra " + (dir / "scores.tsv").string() + " --out-dir " + (dir / "m").string()).code, 0);
  for (auto name : {"mos.tsv", "ranks.tsv", "preference.tsv", "ttests.tsv"}) EXPECT_TRUE(fs::exists(dir / "m" / name));
  write_file(dir / "bad.tsv", "L0\tS0\tBMK\t101\n");
  EXPECT_EQ(cli("eval mushra " + (dir / "bad.tsv").string() + " --out-dir " + (dir / "m2").string()).code, 2);
}

TEST(Cli, CorpusSplit) {
  auto dir = scratch("split");
  ASSERT_EQ(cli("corpus split " + kCorpus.string() + " --train 0.5 --dev 0.25 --test 0.25 --seed 4 --out-dir " +
                dir.string())
                .code,
            0);
  std::size_t total = 0;
  for (auto name : {"train.tsv", "dev.tsv", "test.tsv"}) {
    total += pipeline::parse_corpus(read_file(dir / name), scriptcore::Language::hindi).size();
  }
  EXPECT_EQ(total, 12u);
}
