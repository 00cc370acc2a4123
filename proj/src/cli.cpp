#include "pmx/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

#include "pmx/pipeline.hpp"

namespace pmx {

namespace {

bool readSource(const std::string& path, std::string& text, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "pmx: cannot read " << path << "\n";
    return false;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

void report(const Compilation& c, const std::string& file, std::ostream& err) {
  for (const auto& d : c.diagnostics) err << render(d, file) << "\n";
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pmx: accelerated functional programs", "pmx"};
  app.require_subcommand(1);

  std::string file;
  auto* check = app.add_subcommand("check", "Run every static stage and print the classification table");
  check->add_option("FILE", file, "program")->required();

  auto* run = app.add_subcommand("run", "Check, then evaluate the program");
  std::string mode = "debug";
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int maxRank = 3;
  bool determinism = false;
  bool runtimeChecks = false;
  bool printResult = false;
  run->add_option("--mode", mode, "debug or accel")->check(CLI::IsMember({"debug", "accel"}));
  run->add_option("--workers", workers, "execution lanes for accelerated calls")->check(CLI::PositiveNumber);
  run->add_option("--max-rank", maxRank, "largest tensor rank accepted by CUDA bindings")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--check-determinism", determinism, "compare parallel reduce against a left fold");
  run->add_flag("--enable-runtime-checks", runtimeChecks, "check execution assumptions in accel mode");
  run->add_flag("--print-result", printResult, "print the program's final value");
  run->add_option("FILE", file, "program")->required();

  auto* dump = app.add_subcommand("dump", "Print an intermediate program");
  std::string stage;
  dump->add_option("--stage", stage, "lifted, extracted, anf, fut or cu")
      ->required()
      ->check(CLI::IsMember({"lifted", "extracted", "anf", "fut", "cu"}));
  dump->add_option("FILE", file, "program")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "pmx: " << e.what() << "\n";
    return 2;
  }

  std::string source;
  if (!readSource(file, source, err)) return 2;
  Compilation c = compile(source);

  if (dump->parsed()) {
    auto text = dumpStage(c, stage);
    if (!text) {
      report(c, file, err);
      return 1;
    }
    out << *text;
    return 0;
  }

  if (check->parsed()) {
    if (c.split) out << renderTable(classificationTable(c));
    report(c, file, err);
    return c.ok() ? 0 : 1;
  }

  if (!c.ok()) {
    report(c, file, err);
    return 1;
  }
  RunConfig cfg;
  cfg.mode = mode == "accel" ? Mode::Accel : Mode::Debug;
  cfg.workers = workers;
  cfg.maxRank = maxRank;
  cfg.checkDeterminism = determinism;
  if (runtimeChecks) cfg.runtimeChecks = true;
  cfg.out = &out;
  try {
    RunResult r = runCompiled(c, cfg);
    for (const auto& w : r.warnings) err << file << ": warning: " << w << "\n";
    if (printResult) out << show(r.value) << "\n";
  } catch (const RuntimeError& e) {
    out.flush();
    err << render(e.diagnostic(), file) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pmx
