// axs-signdict: build, check and inspect sign dictionaries.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "axs/dictionary_io.hpp"
#include "axs/error.hpp"
#include "axs/landmark_compiler.hpp"
#include "axs/synthetic_signs.hpp"

namespace {

std::vector<std::string> read_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw axs::Error(axs::Errc::IoError, "cannot read vocabulary " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sign dictionary tool"};
  app.require_subcommand(1);

  std::string input, output, vocab;
  bool strict = false, keep_face = false, face = false, as_json = false;
  std::uint64_t seed = 0;

  auto* compile = app.add_subcommand("compile", "Compile landmark JSON files into a dictionary");
  double trim = axs::kDefaultTrimThreshold;
  compile->add_option("--in", input, "Directory of landmark files")->required()->check(CLI::ExistingDirectory);
  compile->add_option("--out", output, "Dictionary to write")->required();
  compile->add_flag("--strict", strict, "Fail unless the manual alphabet is complete");
  compile->add_option("--trim-threshold", trim, "Idle-frame displacement threshold (0 disables trimming)")
      ->check(CLI::NonNegativeNumber);
  compile->add_flag("--keep-face", keep_face, "Keep the 68-point face");
  compile->add_flag("--json", as_json, "Print the report as JSON");

  auto* validate = app.add_subcommand("validate", "Check a dictionary's structure and checksums");
  validate->add_option("dictionary", input)->required()->check(CLI::ExistingFile);

  auto* exportj = app.add_subcommand("export-json", "Dump a dictionary as JSON");
  exportj->add_option("dictionary", input)->required()->check(CLI::ExistingFile);
  exportj->add_option("-o,--out", output, "Output file (default stdout)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic landmark corpus");
  synth->add_option("--vocabulary", vocab, "Gloss list, one per line")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", output, "Output directory")->required();
  synth->add_option("--seed", seed);
  synth->add_flag("--face", face, "Include 468-point faces");

  auto* build = app.add_subcommand("build-default", "Synthesise a corpus and compile it in one step");
  build->add_option("--vocabulary", vocab)->required()->check(CLI::ExistingFile);
  build->add_option("--work", input, "Scratch directory for the corpus")->required();
  build->add_option("--out", output, "Dictionary to write")->required();
  build->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compile) {
      axs::CompileOptions opt;
      opt.strict = strict;
      opt.keep_face = keep_face;
      opt.trim_threshold = trim;
      auto report = axs::compile_dictionary(input, output, opt);
      std::cout << (as_json ? report.to_json().dump(2) + "\n" : report.render());
      return report.failures.empty() ? 0 : 1;
    }
    if (*validate) {
      auto r = axs::validate_dictionary(input);
      std::cout << r.entries << " entries, version " << r.version << "\n";
      for (const auto& v : r.violations) std::cout << "  " << v.entry << " [" << v.kind << "] " << v.detail << "\n";
      std::cout << (r.ok() ? "OK\n" : "INVALID\n");
      return r.ok() ? 0 : 1;
    }
    if (*exportj) {
      const auto j = axs::export_dictionary_json(input).dump(1);
      if (output.empty()) {
        std::cout << j << "\n";
      } else {
        std::ofstream out(output);
        out << j << "\n";
      }
      return 0;
    }
    axs::SyntheticSignOptions so;
    so.seed = seed;
    so.with_face = face;
    const auto glosses = axs::corpus_glosses(read_vocabulary(vocab));
    if (*synth) {
      auto files = axs::write_synthetic_corpus(output, glosses, so);
      std::cout << "wrote " << files.size() << " landmark files to " << output << "\n";
      return 0;
    }
    std::filesystem::remove_all(input);
    axs::write_synthetic_corpus(input, glosses, so);
    axs::CompileOptions opt;
    opt.strict = true;
    auto report = axs::compile_dictionary(input, output, opt);
    std::cout << "compiled " << report.entries_written << " signs into " << output << "\n";
    return report.failures.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "axs-signdict: " << e.what() << "\n";
    return 2;
  }
}
