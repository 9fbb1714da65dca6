#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "a2p/embedded_data.hpp"
#include "a2p/neural.hpp"
#include "a2p/util.hpp"

namespace a2p::neural {

namespace {

constexpr std::array<std::string_view, 5> kQuinphone = {"LL", "L", "C", "R", "RR"};
constexpr std::array<std::string_view, 3> kTriphone = {"L", "C", "R"};

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

PhoneAttributes PhoneAttributes::parse(std::string_view text) {
  PhoneAttributes out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.rfind("attributes:", 0) == 0) {
      out.names_ = split_whitespace(t.substr(11));
      continue;
    }
    if (out.names_.empty()) throw DataError("attribute table: missing 'attributes:' header");
    auto fields = split(t, '\t');
    if (fields.size() != 2) throw DataError("attribute table line " + std::to_string(lineno) + ": expected 2 fields");
    std::vector<bool> bits(out.names_.size(), false);
    for (const auto& attr : split_whitespace(fields[1])) {
      auto it = std::find(out.names_.begin(), out.names_.end(), attr);
      if (it == out.names_.end()) {
        throw DataError("attribute table line " + std::to_string(lineno) + ": unknown attribute '" + attr + "'");
      }
      bits[static_cast<std::size_t>(it - out.names_.begin())] = true;
    }
    auto symbol = std::string(trim(fields[0]));
    for (const auto& [s, b] : out.rows_) {
      if (s == symbol) throw DataError("attribute table: duplicate symbol '" + symbol + "'");
    }
    out.rows_.emplace_back(std::move(symbol), std::move(bits));
  }
  if (out.names_.empty()) throw DataError("attribute table: missing 'attributes:' header");
  return out;
}

PhoneAttributes PhoneAttributes::builtin(InventoryKind kind) {
  switch (kind) {
    case InventoryKind::cps: return parse(embedded::phone_attributes_cps);
    case InventoryKind::multi: return parse(embedded::phone_attributes_multi);
    case InventoryKind::uni: break;
  }
  throw ConfigError("no attribute table for the uni-grapheme inventory");
}

const std::vector<bool>& PhoneAttributes::of(std::string_view symbol) const {
  for (const auto& [s, bits] : rows_) {
    if (s == symbol) return bits;
  }
  throw UnknownPhone(std::string(symbol));
}

bool PhoneAttributes::has(std::string_view symbol, std::string_view attribute) const {
  auto it = std::find(names_.begin(), names_.end(), attribute);
  if (it == names_.end()) throw DataError("unknown attribute '" + std::string(attribute) + "'");
  return of(symbol)[static_cast<std::size_t>(it - names_.begin())];
}

bool PhoneAttributes::covers(const PhoneInventory& inventory) const {
  for (const auto& s : inventory.symbols()) {
    bool found = std::any_of(rows_.begin(), rows_.end(), [&](const auto& r) { return r.first == s; });
    if (!found) return false;
  }
  return true;
}

FeatureSpec FeatureSpec::for_inventory(const PhoneInventory& inventory) {
  FeatureSpec spec{inventory, std::nullopt};
  if (inventory.kind() == InventoryKind::uni) return spec;
  auto attrs = PhoneAttributes::builtin(inventory.kind());
  if (!attrs.covers(inventory)) {
    throw ConfigError("attribute table does not cover inventory '" + inventory.name() + "'");
  }
  spec.attributes = std::move(attrs);
  return spec;
}

FeatureSchema FeatureSpec::schema() const {
  FeatureSchema s;
  for (auto pos : kQuinphone) {
    for (const auto& p : inventory.symbols()) s.add(std::string(pos) + "=" + p, FeatureKind::binary);
  }
  for (auto name : kPositionalFeatures) s.add(std::string(name), FeatureKind::numeric);
  if (attributes) {
    for (auto pos : kTriphone) {
      for (const auto& a : attributes->names()) s.add(std::string(pos) + ":" + a, FeatureKind::binary);
    }
  }
  return s;
}

bool FeatureSpec::is_vowel(std::string_view phone) const {
  if (phone == kSilence) return false;
  if (attributes) return attributes->has(phone, "vowel");
  return phone.size() == 1 && std::string_view("aeiou").find(phone[0]) != std::string_view::npos;
}

namespace {

// Word index of every phone; -1 for silences and edge phones.
std::vector<int> word_index(const PhoneSequence& seq) {
  std::vector<int> out(seq.phones.size(), -1);
  std::size_t next = 0;
  int word = 0;
  bool started = false;
  for (std::size_t i = 0; i < seq.phones.size(); ++i) {
    while (next < seq.word_starts.size() && seq.word_starts[next] <= i) {
      if (started) ++word;
      ++next;
    }
    if (seq.phones[i] == kSilence) continue;
    out[i] = word;
    started = true;
  }
  // Renumber densely so that leading silences do not create gaps.
  int last = -1, dense = -1;
  for (auto& w : out) {
    if (w < 0) continue;
    if (w != last) {
      last = w;
      ++dense;
    }
    w = dense;
  }
  return out;
}

}  // namespace

std::vector<int> syllabify(const PhoneSequence& seq, const FeatureSpec& spec) {
  const auto words = word_index(seq);
  std::vector<int> out(seq.phones.size(), -1);
  std::size_t i = 0;
  while (i < seq.phones.size()) {
    if (words[i] < 0) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < seq.phones.size() && words[end] == words[i]) ++end;
    // Nuclei of this word as [begin, end) ranges.
    std::vector<std::pair<std::size_t, std::size_t>> nuclei;
    for (std::size_t k = i; k < end;) {
      if (!spec.is_vowel(seq.phones[k])) {
        ++k;
        continue;
      }
      std::size_t v = k;
      while (v < end && spec.is_vowel(seq.phones[v])) ++v;
      nuclei.emplace_back(k, v);
      k = v;
    }
    for (std::size_t k = i; k < end; ++k) out[k] = 0;
    for (std::size_t n = 1; n < nuclei.size(); ++n) {
      const std::size_t gap_begin = nuclei[n - 1].second;
      const std::size_t gap_end = nuclei[n].first;
      const std::size_t start = gap_end - gap_begin <= 1 ? gap_begin : gap_begin + 1;
      for (std::size_t k = start; k < end; ++k) out[k] = static_cast<int>(n);
    }
    i = end;
  }
  return out;
}

Matrix build_duration_features(const PhoneSequence& seq, const FeatureSpec& spec) {
  const std::size_t n = seq.phones.size();
  const std::size_t inv = spec.inventory.size();
  const std::size_t dim = spec.schema().size();
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = spec.inventory.require(seq.phones[i]);
  const std::size_t sil = spec.inventory.require(kSilence);

  const auto words = word_index(seq);
  const auto syllables = syllabify(seq, spec);
  const int word_count = words.empty() ? 0 : *std::max_element(words.begin(), words.end()) + 1;

  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < kQuinphone.size(); ++k) {
      const auto j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(k) - 2;
      const std::size_t id = j < 0 || j >= static_cast<std::ptrdiff_t>(n) ? sil : ids[static_cast<std::size_t>(j)];
      x(row, static_cast<Eigen::Index>(k * inv + id)) = 1.0;
    }
    const auto pos = static_cast<Eigen::Index>(kQuinphone.size() * inv);
    if (words[i] >= 0) {
      // Extent of this phone's syllable and word.
      std::size_t sb = i, se = i + 1;
      while (sb > 0 && words[sb - 1] == words[i] && syllables[sb - 1] == syllables[i]) --sb;
      while (se < n && words[se] == words[i] && syllables[se] == syllables[i]) ++se;
      std::size_t wb = i, we = i + 1;
      while (wb > 0 && words[wb - 1] == words[i]) --wb;
      while (we < n && words[we] == words[i]) ++we;
      const int syllables_in_word = syllables[we - 1] + 1;
      x(row, pos + 0) = static_cast<double>(i - sb);
      x(row, pos + 1) = static_cast<double>(se - 1 - i);
      x(row, pos + 2) = syllables[i];
      x(row, pos + 3) = syllables_in_word - 1 - syllables[i];
      x(row, pos + 4) = words[i];
      x(row, pos + 5) = word_count - 1 - words[i];
    }
    if (spec.attributes) {
      const std::size_t na = spec.attributes->names().size();
      const auto base = pos + static_cast<Eigen::Index>(kPositionalFeatures.size());
      for (std::size_t k = 0; k < kTriphone.size(); ++k) {
        const auto j = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(k) - 1;
        const std::string& p = j < 0 || j >= static_cast<std::ptrdiff_t>(n) ? std::string(kSilence)
                                                                             : seq.phones[static_cast<std::size_t>(j)];
        const auto& bits = spec.attributes->of(p);
        for (std::size_t a = 0; a < na; ++a) {
          if (bits[a]) x(row, base + static_cast<Eigen::Index>(k * na + a)) = 1.0;
        }
      }
    }
  }
  return x;
}

Vector build_acoustic_features(const Vector& phone_features, const FrameContext& f) {
  if (f.state >= f.states || f.frame_in_state >= f.state_frames || f.frame_in_phone >= f.phone_frames) {
    throw DataError("frame context out of range");
  }
  Vector out(phone_features.size() + static_cast<Eigen::Index>(kFramePositionFeatures));
  out.head(phone_features.size()) = phone_features;
  const auto base = phone_features.size();
  const double values[kFramePositionFeatures] = {
      static_cast<double>(f.frame_in_state),
      static_cast<double>(f.state_frames - 1 - f.frame_in_state),
      static_cast<double>(f.frame_in_phone),
      static_cast<double>(f.phone_frames - 1 - f.frame_in_phone),
      static_cast<double>(f.state),
      static_cast<double>(f.states - 1 - f.state),
      static_cast<double>(f.state_frames),
      static_cast<double>(f.phone_frames),
      static_cast<double>(f.frame_in_phone) / static_cast<double>(f.phone_frames),
  };
  for (std::size_t k = 0; k < kFramePositionFeatures; ++k) out(base + static_cast<Eigen::Index>(k)) = values[k];
  return out;
}

Matrix expand_to_frames(const Matrix& phone_features,
                        const std::vector<std::array<double, kStates>>& state_durations) {
  if (static_cast<std::size_t>(phone_features.rows()) != state_durations.size()) {
    throw LengthMismatch(static_cast<std::size_t>(phone_features.rows()), state_durations.size());
  }
  std::vector<std::array<std::size_t, kStates>> frames(state_durations.size());
  std::size_t total = 0;
  for (std::size_t p = 0; p < state_durations.size(); ++p) {
    for (std::size_t s = 0; s < kStates; ++s) {
      double d = std::round(state_durations[p][s]);
      frames[p][s] = d > 0 ? static_cast<std::size_t>(d) : 0;
      total += frames[p][s];
    }
  }
  Matrix out(static_cast<Eigen::Index>(total), phone_features.cols() + static_cast<Eigen::Index>(kFramePositionFeatures));
  Eigen::Index row = 0;
  for (std::size_t p = 0; p < frames.size(); ++p) {
    std::size_t phone_frames = 0;
    for (auto f : frames[p]) phone_frames += f;
    std::size_t in_phone = 0;
    const Vector feats = phone_features.row(static_cast<Eigen::Index>(p)).transpose();
    for (std::size_t s = 0; s < kStates; ++s) {
      for (std::size_t k = 0; k < frames[p][s]; ++k, ++in_phone) {
        FrameContext ctx{s, k, frames[p][s], in_phone, phone_frames, kStates};
        out.row(row++) = build_acoustic_features(feats, ctx).transpose();
      }
    }
  }
  return out;
}

FeatureSchema acoustic_schema(const FeatureSchema& phone_schema) {
  FeatureSchema s = phone_schema;
  for (auto name : kFramePositionNames) s.add(std::string(name), FeatureKind::numeric);
  return s;
}

DurationTarget::DurationTarget(const std::array<double, kSize>& values) : values_(values) {
  double states = 0.0;
  for (std::size_t i = 0; i < kSize; ++i) {
    if (!(values[i] >= 0.0)) throw DataError("duration target: negative or invalid value");
    if (i < kStates) states += values[i];
  }
  if (std::abs(states - values[5]) > 0.5) {
    throw DataError("duration target: sub-states sum to " + format_value(states) + " but phone lasts " +
                    format_value(values[5]));
  }
}

std::vector<std::string> AcousticLayout::names() const {
  std::vector<std::string> out;
  auto block = [&](const std::string& stem, std::size_t n) {
    const char* suffixes[] = {"", "_d", "_dd"};
    for (int k = 0; k < (deltas ? 3 : 1); ++k) {
      for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i) + suffixes[k]);
    }
  };
  block("mcc", mcc);
  block("bap", bap);
  block("lf0_", 1);
  out.push_back("vuv");
  return out;
}

std::vector<DurationRecord> parse_duration_records(std::string_view text) {
  std::vector<DurationRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto f = split(t, '\t');
    if (f.size() != 2 + DurationTarget::kSize) {
      throw DataError("durations line " + std::to_string(lineno) + ": expected 10 fields");
    }
    std::array<double, DurationTarget::kSize> v{};
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(f[2 + i], &used);
        if (used != f[2 + i].size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw DataError("durations line " + std::to_string(lineno) + ": bad number '" + f[2 + i] + "'");
      }
    }
    try {
      out.push_back({f[0], f[1], DurationTarget(v)});
    } catch (const DataError& e) {
      throw DataError("durations line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string serialize_duration_records(const std::vector<DurationRecord>& records) {
  std::string out = "# utterance\tphone";
  for (auto n : kDurationNames) out += "\t" + std::string(n);
  out += '\n';
  for (const auto& r : records) {
    out += r.utterance + '\t' + r.phone;
    for (double v : r.target.values()) out += '\t' + format_value(v);
    out += '\n';
  }
  return out;
}

}  // namespace a2p::neural
