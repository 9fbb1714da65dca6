#include <cstdio>
#include <future>
#include <sstream>

#include "a2p/g2p.hpp"

namespace a2p::g2p {

std::size_t edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp) {
  std::vector<std::size_t> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[hyp.size()];
}

double phone_error_rate(std::span<const std::vector<std::string>> refs,
                        std::span<const std::vector<std::string>> hyps) {
  if (refs.size() != hyps.size()) throw LengthMismatch(refs.size(), hyps.size());
  std::size_t errors = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    errors += edit_distance(refs[i], hyps[i]);
    total += refs[i].size();
  }
  if (total == 0) throw DataError("phone_error_rate: empty reference");
  return static_cast<double>(errors) / static_cast<double>(total);
}

namespace {

struct Tally {
  std::size_t errors = 0;
  std::size_t phones = 0;
  double rate() const { return phones == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(phones); }
};

Tally score(const G2PModel& model, const std::vector<LexiconEntry>& entries, const DecodeOptions& opts) {
  Tally t;
  for (const auto& e : entries) {
    t.errors += edit_distance(e.phones, transcribe(model, e.word, opts).phones);
    t.phones += e.phones.size();
  }
  return t;
}

}  // namespace

SweepReport per_sweep(const PronunciationLexicon& lexicon, const SweepConfig& config) {
  if (config.orders.empty()) throw ConfigError("per_sweep: no orders");
  for (int o : config.orders) {
    if (o < 1 || o > 6) throw ConfigError("per_sweep: orders must be within 1..6");
  }
  if (lexicon.empty()) throw EmptyCorpus();
  auto idx = split_indices(lexicon.size(), config.split, config.seed);
  auto parts = apply_split(lexicon.entries(), idx);
  if (parts.train.empty()) throw DataError("per_sweep: training split is empty");

  PronunciationLexicon train_lex;
  for (const auto& e : parts.train) train_lex.add(e);
  auto aligned = align_lexicon(train_lex, config.align);
  ModelMetadata meta{config.language, train_lex.checksum(), config.align.gmax, config.align.pmax};

  std::vector<int> orders = config.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  // Models share nothing mutable, so each order runs as its own task.
  std::vector<std::future<SweepRow>> jobs;
  for (int order : orders) {
    jobs.push_back(std::async(std::launch::async, [&, order] {
      auto model = G2PModel::train(aligned.sequences, order, config.smoothing, meta);
      SweepRow row;
      row.order = order;
      auto dev = score(model, parts.dev, config.decode);
      auto test = score(model, parts.test, config.decode);
      row.train_per = score(model, parts.train, config.decode).rate();
      row.dev_per = dev.rate();
      row.test_per = test.rate();
      row.heldout_per = Tally{dev.errors + test.errors, dev.phones + test.phones}.rate();
      return row;
    }));
  }
  SweepReport report;
  report.seed = config.seed;
  report.n_train = parts.train.size();
  report.n_dev = parts.dev.size();
  report.n_test = parts.test.size();
  for (auto& j : jobs) report.rows.push_back(j.get());
  return report;
}

std::string SweepReport::to_tsv() const {
  std::ostringstream out;
  out << "# seed\t" << seed << "\n# split\t" << n_train << '\t' << n_dev << '\t' << n_test << '\n';
  out << "order\ttrain_per\tdev_per\ttest_per\theldout_per\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d\t%.6f\t%.6f\t%.6f\t%.6f\n", r.order, r.train_per, r.dev_per, r.test_per,
                  r.heldout_per);
    out << buf;
  }
  return out.str();
}

}  // namespace a2p::g2p
