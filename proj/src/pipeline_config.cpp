#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>
#include <unordered_set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "a2p/graphemes.hpp"
#include "a2p/pipeline.hpp"
#include "a2p/util.hpp"

namespace a2p::pipeline {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::uni: return "uni";
    case Scheme::multi: return "multi";
    case Scheme::g2p: return "g2p";
    case Scheme::cps: return "cps";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  for (auto s : {Scheme::uni, Scheme::multi, Scheme::g2p, Scheme::cps}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("unknown scheme '" + std::string(text) + "' (uni, multi, g2p, cps)");
}

std::string_view system_label(Scheme scheme) {
  switch (scheme) {
    case Scheme::uni: return "UGM";
    case Scheme::multi: return "MGM";
    case Scheme::g2p: return "G2P";
    case Scheme::cps: return "BMK";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Corpus

std::vector<CorpusRecord> parse_corpus(std::string_view text, scriptcore::Language language) {
  utf8_decode(text);  // throws on invalid UTF-8
  const auto table = scriptcore::ScriptMappingTable::builtin(language);
  std::vector<CorpusRecord> out;
  std::unordered_set<std::string> ids;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto cols = split(line, '\t');
    const auto where = "corpus line " + std::to_string(lineno);
    if (cols.size() != 3) throw DataError(where + ": expected id, native and ascii columns");
    CorpusRecord rec{std::string(trim(cols[0])), std::string(trim(cols[1])), std::string(trim(cols[2]))};
    if (rec.id.empty()) throw DataError(where + ": empty id");
    if (!ids.insert(rec.id).second) throw DataError(where + ": duplicate id '" + rec.id + "'");
    const auto native_words = scriptcore::to_cps(rec.native, table).words().size();
    const auto ascii_words = split_whitespace(graphemes::normalize_ascii(rec.ascii)).size();
    if (native_words != ascii_words) {
      throw DataError(where + ": " + std::to_string(native_words) + " native words but " +
                      std::to_string(ascii_words) + " transliterated words");
    }
    if (ascii_words == 0) throw DataError(where + ": no words");
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw EmptyCorpus();
  return out;
}

std::vector<CorpusRecord> load_corpus(const fs::path& path, scriptcore::Language language) {
  return parse_corpus(read_file(path), language);
}

std::string serialize_corpus(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) out += r.id + '\t' + r.native + '\t' + r.ascii + '\n';
  return out;
}

Split<CorpusRecord> split_corpus(const std::vector<CorpusRecord>& corpus, const SplitFractions& fractions,
                                 std::uint64_t seed) {
  if (corpus.empty()) throw EmptyCorpus();
  return apply_split(corpus, split_indices(corpus.size(), fractions, seed));
}

// ---------------------------------------------------------------------------
// Key-value files

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  KeyValueConfig cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.values_[name] = std::string(trim(node.data()));
      continue;
    }
    for (const auto& [key, leaf] : node) cfg.values_[name + "." + key] = std::string(trim(leaf.data()));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse(read_file(path));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "' is not a number: '" + *v + "'");
  }
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    if (v->empty() || v->front() == '-') throw std::invalid_argument(*v);
    auto n = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return n;
  } catch (const std::logic_error&) {
    throw ConfigError("'" + key + "' is not a non-negative integer: '" + *v + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "yes" || *v == "1") return true;
  if (*v == "false" || *v == "no" || *v == "0") return false;
  throw ConfigError("'" + key + "' is not a boolean: '" + *v + "'");
}

void KeyValueConfig::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

const std::vector<std::string>& train_config_keys() {
  static const std::vector<std::string> keys{
      "hidden_layers", "width",           "a",          "b",        "l2",       "batch_size",
      "learning_rate", "momentum",        "momentum_late", "schedule_switch", "top_layer_factor",
      "max_epochs",    "seed"};
  return keys;
}

neural::TrainConfig train_config_from(const KeyValueConfig& config, const std::string& prefix,
                                      neural::TrainConfig base) {
  auto key = [&](const char* name) { return prefix.empty() ? std::string(name) : prefix + "." + name; };
  base.hidden_layers = config.get_uint(key("hidden_layers"), base.hidden_layers);
  base.width = config.get_uint(key("width"), base.width);
  base.a = config.get_double(key("a"), base.a);
  base.b = config.get_double(key("b"), base.b);
  base.l2 = config.get_double(key("l2"), base.l2);
  base.batch_size = config.get_uint(key("batch_size"), base.batch_size);
  base.learning_rate = config.get_double(key("learning_rate"), base.learning_rate);
  base.momentum = config.get_double(key("momentum"), base.momentum);
  base.momentum_late = config.get_double(key("momentum_late"), base.momentum_late);
  base.schedule_switch = config.get_uint(key("schedule_switch"), base.schedule_switch);
  base.top_layer_factor = config.get_double(key("top_layer_factor"), base.top_layer_factor);
  base.max_epochs = config.get_uint(key("max_epochs"), base.max_epochs);
  base.seed = config.get_uint(key("seed"), base.seed);
  if (auto s = seed_override()) base.seed = *s;
  base.validate();
  return base;
}

std::optional<std::uint64_t> seed_override() {
  const char* env = std::getenv(std::string(kSeedEnv).c_str());
  if (env == nullptr || *env == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    std::string s(env);
    if (s.front() == '-') throw std::invalid_argument(s);
    auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string(kSeedEnv) + " is not a non-negative integer: '" + env + "'");
  }
}

// ---------------------------------------------------------------------------
// Pipeline configuration

PipelineConfig PipelineConfig::parse(std::string_view text, const fs::path& base_dir) {
  const auto kv = KeyValueConfig::parse(text);
  std::vector<std::string> allowed{"pipeline.language", "pipeline.scheme",  "pipeline.corpus", "pipeline.output",
                                   "pipeline.seed",     "pipeline.durations", "split.train",    "split.dev",
                                   "split.test",        "cps.mapping",      "cps.schwa",       "multi.inventory",
                                   "g2p.lexicon",       "g2p.model",        "g2p.order"};
  for (const auto& k : train_config_keys()) allowed.push_back("train." + k);
  kv.require_known(allowed);

  auto path = [&](const std::string& key) -> std::optional<fs::path> {
    auto v = kv.get(key);
    if (!v || v->empty()) return std::nullopt;
    fs::path p(*v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  auto required = [&](const std::string& key) {
    auto p = path(key);
    if (!p) throw ConfigError("missing required key '" + key + "'");
    return *p;
  };

  PipelineConfig c;
  c.language = scriptcore::parse_language(kv.get_or("pipeline.language", "hindi"));
  c.scheme = parse_scheme(kv.get_or("pipeline.scheme", "uni"));
  c.corpus = required("pipeline.corpus");
  c.output = required("pipeline.output");
  c.seed = kv.get_uint("pipeline.seed", 1);
  c.durations = path("pipeline.durations");
  c.split.train = kv.get_double("split.train", c.split.train);
  c.split.dev = kv.get_double("split.dev", c.split.dev);
  c.split.test = kv.get_double("split.test", c.split.test);
  c.mapping = path("cps.mapping");
  c.schwa = scriptcore::parse_schwa_policy(kv.get_or("cps.schwa", "retain"));
  c.multi_inventory = path("multi.inventory");
  c.lexicon = path("g2p.lexicon");
  c.g2p_model = path("g2p.model");
  c.g2p_order = static_cast<int>(kv.get_uint("g2p.order", 6));

  auto train = neural::TrainConfig::duration();
  train.seed = c.seed;
  c.train = train_config_from(kv, "train", train);
  if (auto s = seed_override()) c.seed = *s;
  c.checksum = sha256_hex(text);
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse(read_file(path), path.parent_path());
}

void PipelineConfig::validate() const {
  auto exists = [](const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  exists(corpus, "corpus");
  if (durations) exists(*durations, "durations file");
  if (mapping) exists(*mapping, "mapping table");
  if (multi_inventory) exists(*multi_inventory, "multi inventory");
  if (scheme == Scheme::g2p) {
    if (!lexicon && !g2p_model) throw ConfigError("scheme g2p needs g2p.lexicon or g2p.model");
    if (lexicon) exists(*lexicon, "lexicon");
    if (g2p_model) exists(*g2p_model, "g2p model");
  }
  if (g2p_order < 1 || g2p_order > 6) throw ConfigError("g2p.order must be in 1..6");
  const double sum = split.train + split.dev + split.test;
  if (split.train < 0 || split.dev < 0 || split.test < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  if (output.empty()) throw ConfigError("empty output directory");
  train.validate();
}

}  // namespace a2p::pipeline
