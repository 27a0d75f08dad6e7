#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lenc/alignment.hpp"
#include "lenc/contrast.hpp"
#include "lenc/duration_stats.hpp"
#include "lenc/errors.hpp"
#include "lenc/phone_map.hpp"

namespace lenc {

inline constexpr std::string_view kToolVersion = "0.1.0";

namespace fs = std::filesystem;

enum class AlignmentFormat { textgrid, ctm };
enum class OutputFormat { csv, json, markdown };

inline std::string_view format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::markdown: return "markdown";
  }
  return "csv";
}

inline OutputFormat parse_output_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "markdown" || s == "md") return OutputFormat::markdown;
  throw ConfigError("unknown output format '" + std::string(s) + "'");
}

struct CorpusInput {
  std::string id;
  std::vector<fs::path> paths;  // files or directories
  AlignmentFormat format = AlignmentFormat::textgrid;
  std::string tier = "phones";
};

struct AnalysisConfig {
  std::vector<CorpusInput> corpora;
  std::optional<fs::path> phone_map;  // default Wolof map when empty
  double bin_width_ms = 10.0;
  bool outlier_filtering = true;
  fs::path output_dir = "lenc_out";
  std::set<OutputFormat> formats = {OutputFormat::csv, OutputFormat::json, OutputFormat::markdown};
  std::vector<std::pair<std::string, std::string>> comparisons;
  SpeakerRule speaker_rule;
  bool per_speaker = false;
};

inline void validate(const AnalysisConfig& cfg) {
  if (cfg.corpora.empty()) throw ConfigError("config lists no corpora");
  std::set<std::string> ids;
  for (const auto& c : cfg.corpora) {
    if (c.id.empty()) throw ConfigError("corpus id must not be empty");
    if (!ids.insert(c.id).second) throw ConfigError("duplicate corpus id '" + c.id + "'");
    if (c.paths.empty()) throw ConfigError("corpus '" + c.id + "' lists no paths");
  }
  if (!(cfg.bin_width_ms > 0.0)) throw ConfigError("bin_width_ms must be positive");
  for (const auto& [a, b] : cfg.comparisons)
    if (!ids.count(a) || !ids.count(b))
      throw ConfigError("comparison " + a + " vs " + b + " names an unknown corpus");
}

// Relative paths in the config resolve against `base_dir`.
inline AnalysisConfig analysis_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  AnalysisConfig cfg;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("corpora")) {
      for (const auto& c : j.at("corpora")) {
        CorpusInput in;
        in.id = c.at("id").get<std::string>();
        const std::string fmt = c.value("format", std::string("textgrid"));
        if (fmt == "textgrid")
          in.format = AlignmentFormat::textgrid;
        else if (fmt == "ctm")
          in.format = AlignmentFormat::ctm;
        else
          throw ConfigError("corpus '" + in.id + "': unknown format '" + fmt + "'");
        for (const auto& p : c.at("paths")) in.paths.push_back(resolve(p.get<std::string>()));
        in.tier = c.value("tier", in.tier);
        cfg.corpora.push_back(std::move(in));
      }
    }
    if (j.contains("phone_map") && !j.at("phone_map").is_null())
      cfg.phone_map = resolve(j.at("phone_map").get<std::string>());
    cfg.bin_width_ms = j.value("bin_width_ms", cfg.bin_width_ms);
    cfg.outlier_filtering = j.value("outlier_filtering", cfg.outlier_filtering);
    if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
    if (j.contains("formats")) {
      cfg.formats.clear();
      for (const auto& f : j.at("formats")) cfg.formats.insert(parse_output_format(f.get<std::string>()));
    }
    if (j.contains("comparisons"))
      for (const auto& pair : j.at("comparisons")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ConfigError("each comparison must be a [corpus_a, corpus_b] pair");
        cfg.comparisons.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    if (j.contains("speaker_from"))
      cfg.speaker_rule = SpeakerRule::parse(j.at("speaker_from").get<std::string>());
    cfg.per_speaker = j.value("per_speaker", cfg.per_speaker);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline AnalysisConfig load_analysis_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": not valid JSON: " + e.what());
  }
  return analysis_config_from_json(j, path.parent_path());
}

// Canonical JSON of the effective config (after command-line overrides).
inline nlohmann::ordered_json effective_config_json(const AnalysisConfig& cfg) {
  nlohmann::ordered_json j;
  j["corpora"] = nlohmann::ordered_json::array();
  for (const auto& c : cfg.corpora) {
    nlohmann::ordered_json cj;
    cj["id"] = c.id;
    cj["format"] = c.format == AlignmentFormat::ctm ? "ctm" : "textgrid";
    cj["paths"] = nlohmann::ordered_json::array();
    for (const auto& p : c.paths) cj["paths"].push_back(p.generic_string());
    cj["tier"] = c.tier;
    j["corpora"].push_back(cj);
  }
  j["phone_map"] = cfg.phone_map ? nlohmann::ordered_json(cfg.phone_map->generic_string())
                                 : nlohmann::ordered_json(nullptr);
  j["bin_width_ms"] = cfg.bin_width_ms;
  j["outlier_filtering"] = cfg.outlier_filtering;
  j["output_dir"] = cfg.output_dir.generic_string();
  j["formats"] = nlohmann::ordered_json::array();
  for (auto f : cfg.formats) j["formats"].push_back(format_name(f));
  j["comparisons"] = nlohmann::ordered_json::array();
  for (const auto& [a, b] : cfg.comparisons) j["comparisons"].push_back({a, b});
  j["speaker_from"] = cfg.speaker_rule.describe();
  j["per_speaker"] = cfg.per_speaker;
  return j;
}

// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string fmt_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    // avoid "-0.00" for values that round to zero
    bool zero = s.find_first_not_of("-0.") == std::string::npos;
    if (zero) s.erase(0, 1);
  }
  return s;
}

inline constexpr std::string_view kNoLongMass = "NA(no-long-mass)";
inline constexpr std::string_view kNoShortMass = "NA(no-short-mass)";

inline nlohmann::ordered_json to_json(const GammaFit& f) {
  return nlohmann::ordered_json{{"shape", f.shape},
                                {"scale", f.scale},
                                {"n_used", f.n_used},
                                {"log_likelihood", f.log_likelihood},
                                {"converged", f.converged},
                                {"low_n", f.low_n},
                                {"iterations", f.iterations},
                                {"moment_shape", f.moment_shape},
                                {"moment_scale", f.moment_scale},
                                {"moment_log_likelihood", f.moment_log_likelihood}};
}

inline GammaFit gamma_fit_from_json(const nlohmann::json& j) {
  GammaFit f;
  f.shape = j.at("shape").get<double>();
  f.scale = j.at("scale").get<double>();
  f.n_used = j.at("n_used").get<std::size_t>();
  f.log_likelihood = j.at("log_likelihood").get<double>();
  f.converged = j.at("converged").get<bool>();
  f.low_n = j.at("low_n").get<bool>();
  f.iterations = j.at("iterations").get<int>();
  f.moment_shape = j.at("moment_shape").get<double>();
  f.moment_scale = j.at("moment_scale").get<double>();
  f.moment_log_likelihood = j.at("moment_log_likelihood").get<double>();
  return f;
}

namespace detail {
template <class T>
nlohmann::ordered_json opt(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
template <class T>
std::optional<T> opt_from(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const ContrastReport& r) {
  nlohmann::ordered_json j;
  j["vowel"] = vowel_symbol(r.vowel);
  j["corpus_id"] = r.corpus_id;
  j["n_short"] = r.n_short;
  j["n_long"] = r.n_long;
  j["mean_short_ms"] = detail::opt(r.mean_short_ms);
  j["mean_long_ms"] = detail::opt(r.mean_long_ms);
  j["r1"] = detail::opt(r.r1);
  j["r2"] = detail::opt(r.r2);
  j["area"] = detail::opt(r.area);
  j["delta_ms"] = detail::opt(r.delta_ms);
  j["significant"] = r.significant;
  j["flags"] = nlohmann::ordered_json::array();
  for (auto f : r.flags) j["flags"].push_back(flag_name(f));
  j["dip"] = detail::opt(r.dip);
  j["fit_short"] = r.fit_short ? to_json(*r.fit_short) : nlohmann::ordered_json(nullptr);
  j["fit_long"] = r.fit_long ? to_json(*r.fit_long) : nlohmann::ordered_json(nullptr);
  j["error"] = detail::opt(r.error);
  return j;
}

inline ContrastReport contrast_report_from_json(const nlohmann::json& j) {
  ContrastReport r;
  auto v = parse_vowel(j.at("vowel").get<std::string>());
  if (!v) throw ConfigError("unknown vowel in report JSON");
  r.vowel = *v;
  r.corpus_id = j.at("corpus_id").get<std::string>();
  r.n_short = j.at("n_short").get<std::size_t>();
  r.n_long = j.at("n_long").get<std::size_t>();
  r.mean_short_ms = detail::opt_from<double>(j, "mean_short_ms");
  r.mean_long_ms = detail::opt_from<double>(j, "mean_long_ms");
  r.r1 = detail::opt_from<double>(j, "r1");
  r.r2 = detail::opt_from<double>(j, "r2");
  r.area = detail::opt_from<double>(j, "area");
  r.delta_ms = detail::opt_from<double>(j, "delta_ms");
  r.significant = j.at("significant").get<bool>();
  for (const auto& f : j.at("flags")) {
    auto flag = parse_flag(f.get<std::string>());
    if (!flag) throw ConfigError("unknown flag in report JSON");
    r.flags.insert(*flag);
  }
  r.dip = detail::opt_from<double>(j, "dip");
  if (!j.at("fit_short").is_null()) r.fit_short = gamma_fit_from_json(j.at("fit_short"));
  if (!j.at("fit_long").is_null()) r.fit_long = gamma_fit_from_json(j.at("fit_long"));
  r.error = detail::opt_from<std::string>(j, "error");
  return r;
}

inline std::string csv_quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<ContrastReport> in_table_order(std::vector<ContrastReport> reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const ContrastReport& a, const ContrastReport& b) { return a.vowel < b.vowel; });
  return reports;
}

inline std::string joined_flags(const ContrastReport& r, std::string_view sep) {
  std::string s;
  for (auto f : r.flags) {
    if (!s.empty()) s += sep;
    s += flag_name(f);
  }
  return s;
}

inline std::string table_csv(const std::vector<ContrastReport>& reports) {
  std::string s =
      "vowel,corpus,n_short,n_long,mean_short_ms,mean_long_ms,r1,r2,area,delta_ms,significant,"
      "flags,shape_short,scale_short,shape_long,scale_long,dip,error\n";
  auto num = [](const std::optional<double>& v) { return v ? fmt_full(*v) : std::string(); };
  for (const auto& r : in_table_order(reports)) {
    const bool have_ratios = !r.error && !r.has(ReportFlag::no_interior_mode);
    s += std::string(vowel_symbol(r.vowel)) + "," + csv_quote(r.corpus_id) + "," +
         std::to_string(r.n_short) + "," + std::to_string(r.n_long) + "," + num(r.mean_short_ms) +
         "," + num(r.mean_long_ms) + ",";
    s += (have_ratios && !r.r1 ? std::string(kNoLongMass) : num(r.r1)) + ",";
    s += (have_ratios && !r.r2 ? std::string(kNoShortMass) : num(r.r2)) + ",";
    s += num(r.area) + "," + num(r.delta_ms) + "," + (r.significant ? "true" : "false") + "," +
         joined_flags(r, ";") + ",";
    s += (r.fit_short ? fmt_full(r.fit_short->shape) : "") + "," +
         (r.fit_short ? fmt_full(r.fit_short->scale) : "") + "," +
         (r.fit_long ? fmt_full(r.fit_long->shape) : "") + "," +
         (r.fit_long ? fmt_full(r.fit_long->scale) : "") + ",";
    s += num(r.dip) + "," + (r.error ? csv_quote(*r.error) : "") + "\n";
  }
  return s;
}

inline std::string table_json(const std::vector<ContrastReport>& reports) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : in_table_order(reports)) j.push_back(to_json(r));
  return j.dump(2) + "\n";
}

inline std::vector<ContrastReport> reports_from_json(std::string_view text) {
  std::vector<ContrastReport> out;
  for (const auto& r : nlohmann::json::parse(text)) out.push_back(contrast_report_from_json(r));
  return out;
}

// Two rows per vowel like the published tables: the short row carries the
// features, the long row only its count and mean.
inline std::string table_markdown(const std::vector<ContrastReport>& reports) {
  std::string s =
      "| Phoneme | #occurrences | μ (ms) | r1 | r2 | 𝒜 | Δ (ms) | significant | flags |\n"
      "|---|---:|---:|---:|---:|---:|---:|:---:|---|\n";
  bool footnote = false;
  auto mean = [](const std::optional<double>& m) { return m ? fmt_fixed(*m, 0) : std::string("–"); };
  for (const auto& r : in_table_order(reports)) {
    const std::string sym(vowel_symbol(r.vowel));
    std::string r1, r2, area, delta, sig, flags = joined_flags(r, ", ");
    if (r.error) {
      r1 = r2 = area = delta = "–";
      sig = "error";
      flags = flags.empty() ? *r.error : flags + ", " + *r.error;
    } else {
      const bool have_ratios = !r.has(ReportFlag::no_interior_mode);
      if (r.r1)
        r1 = "**" + fmt_fixed(*r.r1, 2) + "**";
      else if (have_ratios) {
        r1 = std::string(kNoLongMass) + " †";
        footnote = true;
      } else
        r1 = "–";
      if (r.r2)
        r2 = "**" + fmt_fixed(*r.r2, 2) + "**";
      else
        r2 = have_ratios ? std::string(kNoShortMass) : "–";
      area = r.area ? "**" + fmt_fixed(*r.area, 2) + "**" : "–";
      delta = r.delta_ms ? "**" + fmt_fixed(*r.delta_ms, 0) + "**" : "–";
      sig = r.significant ? "yes" : "no";
    }
    s += "| /" + sym + "/ | " + std::to_string(r.n_short) + " | " + mean(r.mean_short_ms) + " | " +
         r1 + " | " + r2 + " | " + area + " | " + delta + " | " + sig + " | " + flags + " |\n";
    s += "| /" + sym + "ː/ | " + std::to_string(r.n_long) + " | " + mean(r.mean_long_ms) +
         " | | | | | | |\n";
  }
  if (footnote)
    s += "\n† The long-vowel density is zero at the mode of the short-vowel density, so r1 "
         "cannot be computed.\n";
  return s;
}

inline std::string emit_table(const std::vector<ContrastReport>& reports, OutputFormat format) {
  if (reports.empty()) throw DomainError("emit_table needs at least one report");
  switch (format) {
    case OutputFormat::csv: return table_csv(reports);
    case OutputFormat::json: return table_json(reports);
    case OutputFormat::markdown: return table_markdown(reports);
  }
  throw ConfigError("unknown table format");
}

inline std::string emit_table(const std::vector<ContrastReport>& reports, std::string_view format) {
  return emit_table(reports, parse_output_format(format));
}

// Histogram densities and fitted curves on the union of bin centres and a
// 1 ms grid over [0, U].
inline std::string emit_plotdata(const ContrastReport& report, const Histogram& hist_short,
                                 const Histogram& hist_long) {
  if (report.error || !report.fit_short || !report.fit_long)
    throw DomainError("plot data needs a report with both gamma fits");
  const GammaFit& fs = *report.fit_short;
  const GammaFit& fl = *report.fit_long;
  const double upper = std::max(gamma_upper_extent(fs), gamma_upper_extent(fl));

  std::vector<double> xs;
  const auto last = static_cast<long>(std::floor(upper));
  for (long i = 0; i <= last; ++i) xs.push_back(static_cast<double>(i));
  for (const Histogram* h : {&hist_short, &hist_long})
    for (std::size_t b = 0; b < h->bins(); ++b) xs.push_back(0.5 * (h->bin_edges[b] + h->bin_edges[b + 1]));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  std::string s = "x_ms,hist_density_short,hist_density_long,pdf_short,pdf_long\n";
  for (double x : xs) {
    s += fmt_full(x) + "," + fmt_full(hist_short.density_at(x)) + "," +
         fmt_full(hist_long.density_at(x)) + "," + fmt_full(gamma_pdf(fs, x)) + "," +
         fmt_full(gamma_pdf(fl, x)) + "\n";
  }
  return s;
}

// Writes to a sibling temporary, then renames over the target.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Orchestration

// A failure that invalidates a whole corpus (missing or unparseable input).
class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedCorpus {
  std::string id;
  std::vector<fs::path> files;
  std::vector<VowelToken> tokens;
  std::vector<std::string> warnings;
};

inline std::vector<fs::path> expand_inputs(const CorpusInput& in) {
  std::vector<fs::path> files;
  for (const auto& p : in.paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if ((in.format == AlignmentFormat::textgrid && ext == ".textgrid") ||
            (in.format == AlignmentFormat::ctm && ext == ".ctm"))
          found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw CorpusError(p.string() + ": directory holds no alignment files");
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      files.push_back(p);
    } else {
      throw CorpusError(p.string() + ": no such file or directory");
    }
  }
  return files;
}

inline LoadedCorpus load_corpus(const CorpusInput& in, const PhoneMap& map, const SpeakerRule& rule) {
  LoadedCorpus out;
  out.id = in.id;
  out.files = expand_inputs(in);
  for (const auto& file : out.files) {
    std::string text;
    try {
      text = read_file(file);
    } catch (const std::runtime_error& e) {
      throw CorpusError(e.what());
    }
    std::vector<PhoneInterval> intervals;
    try {
      if (in.format == AlignmentFormat::ctm) {
        intervals = parse_ctm(text);
      } else {
        TextGridParse tg = parse_textgrid(text, file.stem().string());
        for (auto& w : tg.warnings) out.warnings.push_back(file.string() + ": " + w);
        const IntervalTier* chosen = nullptr;
        for (const auto& t : tg.tiers)
          if (t.name == in.tier) chosen = &t;
        if (!chosen && tg.tiers.size() == 1) chosen = &tg.tiers.front();
        if (!chosen)
          throw CorpusError(file.string() + ": no interval tier named '" + in.tier + "'");
        intervals = chosen->intervals;
      }
    } catch (const ParseError& e) {
      throw CorpusError(file.string() + ": " + e.what());
    }
    assign_speakers(intervals, rule);
    auto toks = extract_vowel_tokens(intervals, map, in.id);
    out.tokens.insert(out.tokens.end(), std::make_move_iterator(toks.begin()),
                      std::make_move_iterator(toks.end()));
  }
  if (out.tokens.empty())
    throw CorpusError(in.paths.front().string() + ": corpus '" + in.id + "' contains no vowel tokens");
  return out;
}

struct VowelAnalysis {
  ContrastReport report;
  Histogram hist_short;
  Histogram hist_long;
};

// One report per contrast vowel that has any tokens, in table order.
inline std::vector<VowelAnalysis> analyze_corpus(const std::vector<VowelToken>& tokens,
                                                 std::string_view corpus_id, double bin_width_ms,
                                                 bool outlier_filtering) {
  const CellSets cells = partition_tokens(tokens, corpus_id);
  std::vector<VowelAnalysis> out;
  for (Vowel v : kContrastVowels) {
    auto s_it = cells.find(Cell{v, Length::short_});
    auto l_it = cells.find(Cell{v, Length::long_});
    if (s_it == cells.end() && l_it == cells.end()) continue;
    const DurationSampleSet empty_s(v, Length::short_, std::string(corpus_id), {});
    const DurationSampleSet empty_l(v, Length::long_, std::string(corpus_id), {});
    const DurationSampleSet& s = s_it != cells.end() ? s_it->second : empty_s;
    const DurationSampleSet& l = l_it != cells.end() ? l_it->second : empty_l;

    VowelAnalysis va;
    va.report = contrast_report(s, l, ContrastOptions{outlier_filtering, true});
    va.hist_short = build_histogram(outlier_filtering ? filter_outliers(s) : s, bin_width_ms);
    va.hist_long = build_histogram(outlier_filtering ? filter_outliers(l) : l, bin_width_ms);
    out.push_back(std::move(va));
  }
  return out;
}

inline std::string speakers_csv(const std::vector<VowelToken>& tokens) {
  std::map<std::tuple<std::string, Vowel, Length>, std::vector<double>> groups;
  for (const auto& t : tokens)
    groups[{t.speaker_id.value_or(""), t.vowel, t.length}].push_back(t.duration_ms);
  std::string s = "speaker,vowel,length,n,mean_ms,sd_ms\n";
  for (const auto& [key, xs] : groups) {
    const auto& [spk, v, l] = key;
    const Summary sm = summarize(xs);
    s += csv_quote(spk) + "," + std::string(vowel_symbol(v)) + "," + std::string(length_name(l)) +
         "," + std::to_string(sm.n) + "," + (sm.mean_ms ? fmt_full(*sm.mean_ms) : "") + "," +
         (sm.sd_ms ? fmt_full(*sm.sd_ms) : "") + "\n";
  }
  return s;
}

struct ComparisonRow {
  Vowel vowel;
  std::optional<Length> length;
  std::optional<TestResult> result;
  std::optional<std::string> error;
};

inline std::vector<ComparisonRow> compare_all_vowels(const LoadedCorpus& a, const LoadedCorpus& b,
                                                     bool outlier_filtering) {
  std::vector<ComparisonRow> rows;
  for (Vowel v : kContrastVowels) {
    for (std::optional<Length> len :
         {std::optional<Length>(Length::short_), std::optional<Length>(Length::long_),
          std::optional<Length>()}) {
      ComparisonRow row{v, len, std::nullopt, std::nullopt};
      try {
        row.result = compare_corpora(v, a.tokens, a.id, b.tokens, b.id, len, outlier_filtering).result;
      } catch (const DomainError& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string comparisons_csv(const std::vector<ComparisonRow>& rows, std::string_view a,
                                   std::string_view b) {
  std::string s = "vowel,length,corpus_a,corpus_b,n_a,n_b,ks_d,p_value,error\n";
  for (const auto& r : rows) {
    s += std::string(vowel_symbol(r.vowel)) + "," +
         (r.length ? std::string(length_name(*r.length)) : std::string("pooled")) + "," +
         csv_quote(a) + "," + csv_quote(b) + ",";
    if (r.result)
      s += std::to_string(r.result->n1) + "," + std::to_string(*r.result->n2) + "," +
           fmt_full(r.result->statistic) + "," + fmt_full(*r.result->p_value) + ",\n";
    else
      s += ",,,," + csv_quote(r.error.value_or("")) + "\n";
  }
  return s;
}

inline std::string comparisons_json(const std::vector<ComparisonRow>& rows, std::string_view a,
                                    std::string_view b) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["vowel"] = vowel_symbol(r.vowel);
    row["length"] = r.length ? std::string(length_name(*r.length)) : std::string("pooled");
    row["corpus_a"] = a;
    row["corpus_b"] = b;
    if (r.result) {
      row["kind"] = test_kind_name(r.result->kind);
      row["n_a"] = r.result->n1;
      row["n_b"] = *r.result->n2;
      row["statistic"] = r.result->statistic;
      row["p_value"] = *r.result->p_value;
    }
    row["error"] = detail::opt(r.error);
    j.push_back(row);
  }
  return j.dump(2) + "\n";
}

inline std::string comparisons_markdown(const std::vector<ComparisonRow>& rows, std::string_view a,
                                        std::string_view b) {
  std::string s = "KS comparison: " + std::string(a) + " vs " + std::string(b) + "\n\n" +
                  "| Phoneme | cell | n (" + std::string(a) + ") | n (" + std::string(b) +
                  ") | D | p-value |\n|---|---|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    s += "| /" + std::string(vowel_symbol(r.vowel)) + "/ | " +
         (r.length ? std::string(length_name(*r.length)) : std::string("pooled")) + " | ";
    if (r.result) {
      char p[32];
      std::snprintf(p, sizeof p, "%.3g", *r.result->p_value);
      s += std::to_string(r.result->n1) + " | " + std::to_string(*r.result->n2) + " | " +
           fmt_fixed(r.result->statistic, 3) + " | " + p + " |\n";
    } else {
      s += "– | – | – | " + r.error.value_or("") + " |\n";
    }
  }
  return s;
}

struct RunOptions {
  bool features = true;     // per-corpus tables and plot data
  bool comparisons = true;  // KS comparisons between configured corpora
};

// Runs the configured analysis and writes all outputs under cfg.output_dir.
// Returns 0 on success, 1 if any corpus-level failure occurred. Vowel-level
// problems only mark their rows. Throws ConfigError for unusable configs.
inline int run_analysis(const AnalysisConfig& cfg, std::ostream& log, RunOptions opts = {}) {
  validate(cfg);
  if (!opts.features && cfg.comparisons.empty())
    throw ConfigError("config lists no comparisons");

  PhoneMap map = default_phone_map();
  if (cfg.phone_map) {
    try {
      map = load_phone_map(read_file(*cfg.phone_map));
    } catch (const std::runtime_error& e) {
      throw ConfigError(cfg.phone_map->string() + ": " + e.what());
    }
  }

  std::set<std::string> needed;
  for (const auto& c : cfg.corpora) needed.insert(c.id);
  if (!opts.features) {
    needed.clear();
    for (const auto& [a, b] : cfg.comparisons) needed.insert({a, b});
  }

  const fs::path& out = cfg.output_dir;
  std::map<std::string, LoadedCorpus> loaded;
  nlohmann::ordered_json corpora_meta = nlohmann::ordered_json::array();
  int status = 0;

  for (const auto& in : cfg.corpora) {
    if (!needed.count(in.id)) continue;
    nlohmann::ordered_json meta;
    meta["id"] = in.id;
    try {
      LoadedCorpus lc = load_corpus(in, map, cfg.speaker_rule);
      for (const auto& w : lc.warnings) log << "warning: " << w << "\n";
      meta["status"] = "ok";
      meta["files"] = lc.files.size();
      meta["vowel_tokens"] = lc.tokens.size();
      meta["warnings"] = lc.warnings;

      if (opts.features) {
        const auto analyses = analyze_corpus(lc.tokens, lc.id, cfg.bin_width_ms, cfg.outlier_filtering);
        std::vector<ContrastReport> reports;
        for (const auto& va : analyses) reports.push_back(va.report);
        const fs::path dir = out / lc.id;
        if (cfg.formats.count(OutputFormat::csv)) write_file_atomic(dir / "features.csv", table_csv(reports));
        if (cfg.formats.count(OutputFormat::json)) write_file_atomic(dir / "features.json", table_json(reports));
        if (cfg.formats.count(OutputFormat::markdown))
          write_file_atomic(dir / "features.md", table_markdown(reports));
        nlohmann::ordered_json vowel_meta = nlohmann::ordered_json::array();
        for (const auto& va : analyses) {
          nlohmann::ordered_json vm;
          vm["vowel"] = vowel_symbol(va.report.vowel);
          vm["error"] = detail::opt(va.report.error);
          vm["flags"] = nlohmann::ordered_json::array();
          for (auto f : va.report.flags) vm["flags"].push_back(flag_name(f));
          if (!va.report.error) {
            const std::string name = "plot_" + std::string(vowel_slug(va.report.vowel)) + ".csv";
            write_file_atomic(dir / name, emit_plotdata(va.report, va.hist_short, va.hist_long));
            vm["plot_data"] = name;
          } else {
            log << "note: " << lc.id << " /" << vowel_symbol(va.report.vowel)
                << "/: " << *va.report.error << "\n";
          }
          vowel_meta.push_back(vm);
        }
        meta["vowels"] = vowel_meta;
        if (cfg.per_speaker) write_file_atomic(dir / "speakers.csv", speakers_csv(lc.tokens));
      }
      loaded.emplace(lc.id, std::move(lc));
    } catch (const CorpusError& e) {
      log << "error: " << e.what() << "\n";
      meta["status"] = "error";
      meta["error"] = e.what();
      status = 1;
    }
    corpora_meta.push_back(meta);
  }

  nlohmann::ordered_json comparisons_meta = nlohmann::ordered_json::array();
  if (opts.comparisons) {
    for (const auto& [a, b] : cfg.comparisons) {
      nlohmann::ordered_json cm;
      cm["corpus_a"] = a;
      cm["corpus_b"] = b;
      if (!loaded.count(a) || !loaded.count(b)) {
        cm["status"] = "skipped: corpus failed to load";
        comparisons_meta.push_back(cm);
        continue;
      }
      const auto rows = compare_all_vowels(loaded.at(a), loaded.at(b), cfg.outlier_filtering);
      const fs::path base = out / "comparisons" / (a + "__vs__" + b);
      if (cfg.formats.count(OutputFormat::csv))
        write_file_atomic(fs::path(base.string() + ".csv"), comparisons_csv(rows, a, b));
      if (cfg.formats.count(OutputFormat::json))
        write_file_atomic(fs::path(base.string() + ".json"), comparisons_json(rows, a, b));
      if (cfg.formats.count(OutputFormat::markdown))
        write_file_atomic(fs::path(base.string() + ".md"), comparisons_markdown(rows, a, b));
      cm["status"] = "ok";
      comparisons_meta.push_back(cm);
    }
  }

  const auto eff = effective_config_json(cfg);
  nlohmann::ordered_json meta;
  meta["tool"] = "lencontrast";
  meta["version"] = kToolVersion;
  meta["config_hash"] = fnv1a_hex(eff.dump());
  meta["config"] = eff;
  meta["phone_map"] = cfg.phone_map ? "file" : "default";
  meta["outlier_filtering"] = cfg.outlier_filtering;
  meta["ks_on_filtered_durations"] = cfg.outlier_filtering;
  meta["bin_width_ms"] = cfg.bin_width_ms;
  meta["significance_area_threshold"] = kSignificantArea;
  meta["corpora"] = corpora_meta;
  meta["comparisons"] = comparisons_meta;
  meta["exit_status"] = status;
  write_file_atomic(out / "run_metadata.json", meta.dump(2) + "\n");
  return status;
}

}  // namespace lenc
