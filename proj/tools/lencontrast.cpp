// lencontrast: vowel length contrast features from forced alignments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lenc/lenc.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  double bin_width = 0.0;
  bool no_outlier_filter = false;
  std::string speaker_from;
  bool per_speaker = false;
  std::string output_dir;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--bin-width", o.bin_width, "histogram bin width in ms")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-outlier-filter", o.no_outlier_filter, "skip the mean +- 3 sd filter");
  cmd->add_option("--speaker-from", o.speaker_from, "none | fixed:<name> | prefix:<delimiter>");
  cmd->add_flag("--per-speaker", o.per_speaker, "also write per-speaker summaries");
  cmd->add_option("--out", o.output_dir, "output directory (overrides the config)");
}

lenc::AnalysisConfig effective_config(const std::string& path, const Overrides& o) {
  auto cfg = lenc::load_analysis_config(path);
  if (o.bin_width > 0.0) cfg.bin_width_ms = o.bin_width;
  if (o.no_outlier_filter) cfg.outlier_filtering = false;
  if (!o.speaker_from.empty()) cfg.speaker_rule = lenc::SpeakerRule::parse(o.speaker_from);
  if (o.per_speaker) cfg.per_speaker = true;
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  return cfg;
}

std::string truth_csv(const lenc::GeneratedCorpus& corpus) {
  std::string s = "utterance_id,speaker_id,vowel,length,drawn_ms,emitted_ms\n";
  for (const auto& t : corpus.truth) {
    s += t.utterance_id + "," + t.speaker_id + "," + std::string(lenc::vowel_symbol(t.cell.vowel)) +
         "," + std::string(lenc::length_name(t.cell.length)) + "," + lenc::fmt_full(t.drawn_ms) + "," +
         lenc::fmt_full(t.emitted_ms) + "\n";
  }
  return s;
}

int run_synth(const std::string& spec_path, const std::string& out_dir) {
  const auto spec = lenc::load_corpus_spec(lenc::read_file(spec_path));
  const auto corpus = lenc::generate_corpus(spec);
  const fs::path out = out_dir.empty() ? fs::path(spec.corpus_id) : fs::path(out_dir);
  if (!corpus.ctm.empty()) lenc::write_file_atomic(out / (spec.corpus_id + ".ctm"), corpus.ctm);
  for (const auto& [utt, text] : corpus.textgrids)
    lenc::write_file_atomic(out / "textgrid" / (utt + ".TextGrid"), text);
  lenc::write_file_atomic(out / "truth.csv", truth_csv(corpus));
  std::cerr << "wrote " << corpus.truth.size() << " vowel tokens to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vowel length contrast features from phone-level alignments"};
  app.set_version_flag("--version", std::string(lenc::kToolVersion));
  app.require_subcommand(1);

  std::string config_path, spec_path, synth_out;
  Overrides analyze_o, compare_o;

  auto* analyze = app.add_subcommand("analyze", "feature tables, plot data and configured comparisons");
  analyze->add_option("--config", config_path, "analysis config (JSON)")->required();
  add_overrides(analyze, analyze_o);

  auto* compare = app.add_subcommand("compare", "cross-corpus KS comparisons only");
  compare->add_option("--config", config_path, "analysis config (JSON)")->required();
  add_overrides(compare, compare_o);

  auto* synth = app.add_subcommand("synth", "generate a synthetic aligned corpus");
  synth->add_option("--spec", spec_path, "corpus spec (JSON)")->required();
  synth->add_option("--out", synth_out, "output directory (default: the corpus id)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(spec_path, synth_out);
    const bool features = analyze->parsed();
    const auto cfg = effective_config(config_path, features ? analyze_o : compare_o);
    lenc::RunOptions opts;
    opts.features = features;
    return lenc::run_analysis(cfg, std::cerr, opts);
  } catch (const lenc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
