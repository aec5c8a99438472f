// Copyright 2026 The EmoPro Authors.
// SPDX-License-Identifier: Apache-2.0

// emopro: static/dynamic prompt selection from the command line.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "emopro/config.hpp"
#include "emopro/corpus.hpp"
#include "emopro/error.hpp"
#include "emopro/mock_backend.hpp"
#include "emopro/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

int exit_code_for(const emopro::Error& e) {
  switch (e.code()) {
    case emopro::Errc::io:
    case emopro::Errc::parse:
    case emopro::Errc::schema_version:
      return kExitUsage;
    default:
      return kExitPipeline;
  }
}

// One `--<key>` flag per config key; only flags actually given override.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : emopro::SelectionConfig::keys()) {
      cmd.add_option("--" + key, values[key], "config key " + key);
    }
  }

  // defaults < stored snapshot < config file < environment < flags
  emopro::SelectionConfig build(CLI::App& cmd,
                                const std::map<std::string, std::string>* snapshot = nullptr) {
    emopro::SelectionConfig config;
    if (snapshot != nullptr) config = emopro::SelectionConfig::from_key_values(*snapshot);
    if (!config_file.empty()) emopro::apply_config_file(config, config_file);
    emopro::apply_environment(config);
    for (const auto& key : emopro::SelectionConfig::keys()) {
      if (cmd.count("--" + key) > 0) config.set(key, values[key]);
    }
    return config;
  }
};

int cmd_ingest(const std::string& manifest, const std::string& speaker,
               const std::string& emotion_text, const emopro::SelectionConfig& config) {
  auto pool = emopro::load_manifest(manifest, speaker, emopro::parse_emotion(emotion_text));
  std::size_t flagged = 0;
  for (auto& candidate : pool.candidates) {
    try {
      const auto audio = emopro::decode_audio(candidate);
      const auto report = emopro::validate_candidate(candidate, audio, config.validation);
      std::string flags;
      for (const auto& f : report.flags()) flags += (flags.empty() ? "" : ",") + f;
      if (!report.ok()) ++flagged;
      std::cout << candidate.id << '\t' << candidate.duration_s << "s\t"
                << (flags.empty() ? "ok" : flags) << '\n';
    } catch (const emopro::Error& e) {
      ++flagged;
      std::cout << candidate.id << "\t-\t" << emopro::to_string(e.code()) << '\n';
    }
  }
  std::cout << pool.size() << " candidates, " << flagged << " flagged\n";
  return kExitOk;
}

int cmd_static(const emopro::SelectionConfig& config, const std::string& manifest,
               const std::string& speaker, const std::string& emotion_text,
               const std::string& out) {
  const auto emotion = emopro::parse_emotion(emotion_text);
  auto client = emopro::make_backend_client(config);
  const auto result = emopro::run_static(config, manifest, speaker, emotion, *client);
  emopro::write_result(result, out);
  spdlog::info("wrote {} ({} wire calls, {} cache hits)", out, client->wire_calls(),
               client->cache_hits());
  if (!result.complete) {
    std::cerr << "static selection failed at " << result.failure_stage << ": "
              << result.failure_message << '\n';
    return kExitPipeline;
  }
  for (const auto& id : result.top_k) std::cout << id << '\n';
  return kExitOk;
}

int cmd_dynamic(const emopro::StaticSelectionResult& result,
                const emopro::SelectionConfig& config, const std::string& text, bool as_json) {
  auto client = emopro::make_backend_client(config);
  const auto selection = emopro::run_dynamic(result, text, *client);
  if (as_json) {
    emopro::Json scores = emopro::Json::array();
    for (const auto& s : selection.scores) {
      scores.push_back({{"id", s.candidate_id}, {"relevance", s.relevance}});
    }
    emopro::Json doc = {{"chosen", selection.chosen}, {"scores", scores},
                        {"fell_back", selection.fell_back}};
    if (selection.fell_back) doc["fallback_reason"] = selection.fallback_reason;
    std::cout << doc.dump() << '\n';
  } else {
    std::cout << selection.chosen << '\n';
    for (const auto& s : selection.scores) {
      std::printf("  %s\t%.4f\n", s.candidate_id.c_str(), s.relevance);
    }
    if (selection.fell_back) std::cout << "  (fallback: " << selection.fallback_reason << ")\n";
  }
  return kExitOk;
}

int cmd_mock_serve(const std::string& fixture, int port) {
  auto backend = emopro::MockBackend::from_file(fixture);
  emopro::MockServer server(backend);
  spdlog::info("mock backends on 127.0.0.1:{}", port);
  server.listen_blocking(port);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("emopro"));

  CLI::App app{"Emotional prompt selection for zero-shot TTS"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->capture_default_str();

  std::string manifest, speaker, emotion, out, result_path, text, fixture;
  bool as_json = false;
  int port = 8765;

  auto* ingest = app.add_subcommand("ingest", "load and validate a candidate pool");
  ConfigFlags ingest_flags;
  ingest->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  ingest->add_option("--speaker", speaker)->required();
  ingest->add_option("--emotion", emotion)->required();
  ingest_flags.attach(*ingest);

  auto* stat = app.add_subcommand("static", "run static selection and write a result file");
  ConfigFlags static_flags;
  stat->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  stat->add_option("--speaker", speaker)->required();
  stat->add_option("--emotion", emotion)->required();
  stat->add_option("--out", out)->required();
  static_flags.attach(*stat);

  auto* dyn = app.add_subcommand("dynamic", "pick one prompt from a result for a target text");
  ConfigFlags dynamic_flags;
  dyn->add_option("--result", result_path)->required();
  dyn->add_option("--text", text)->required();
  dyn->add_flag("--json", as_json, "print one JSON object");
  dynamic_flags.attach(*dyn);

  auto* rep = app.add_subcommand("report", "print the top-k table of a result file");
  rep->add_option("--result", result_path)->required();

  auto* mock = app.add_subcommand("mock-serve", "serve the mock backends over HTTP");
  mock->add_option("--fixture", fixture)->required()->check(CLI::ExistingFile);
  mock->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (ingest->parsed()) {
      return cmd_ingest(manifest, speaker, emotion, ingest_flags.build(*ingest));
    }
    if (stat->parsed()) {
      return cmd_static(static_flags.build(*stat), manifest, speaker, emotion, out);
    }
    if (dyn->parsed()) {
      const auto result = emopro::read_result(result_path);
      return cmd_dynamic(result, dynamic_flags.build(*dyn, &result.config), text, as_json);
    }
    if (rep->parsed()) {
      std::cout << emopro::render_report(emopro::read_result(result_path));
      return kExitOk;
    }
    if (mock->parsed()) return cmd_mock_serve(fixture, port);
  } catch (const emopro::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPipeline;
  }
  return kExitUsage;
}
