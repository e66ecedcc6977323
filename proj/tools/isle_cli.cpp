// Command-line entry point. Exit codes: 0 success, 1 I/O or network
// failure, 2 invalid input (bad flags, malformed files, unavailable d).

#include <pthread.h>

#include <csignal>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isle/isle.hpp"

namespace fs = std::filesystem;
using namespace isle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::network: return kExitIo;
    default: return kExitInvalid;
  }
}

std::uint32_t default_alpha() {
  if (const char* env = std::getenv("ISLE_ALPHA")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoul(env, &used);
      if (used == std::strlen(env) && v >= 1 && v <= 0xffff) return static_cast<std::uint32_t>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::validation, std::string("ISLE_ALPHA must be an integer in [1, 65535], got '") + env + "'");
  }
  return kDefaultAlpha;
}

struct ScorerFlags {
  std::string kind = "linear_probe";
  std::uint32_t input_size = 224;
  std::uint64_t seed = 7;
  int n_labels = 0;  // 0: take from the labels file
  std::string scores_csv;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--scorer", kind, "linear_probe or precomputed")
        ->check(CLI::IsMember({"linear_probe", "precomputed"}));
    cmd->add_option("--input-size", input_size, "model input size in pixels")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "linear probe seed (matches the synthetic corpus seed)");
    cmd->add_option("--n-labels", n_labels, "linear probe head count")->check(CLI::NonNegativeNumber);
    cmd->add_option("--scores", scores_csv, "precomputed scores CSV (asset_id,d,<labels>...)");
  }

  void check() const {
    if (kind == "precomputed" && scores_csv.empty()) {
      fail(ErrorKind::validation, "--scorer precomputed requires --scores");
    }
  }

  ScorerSpec build(int label_count) const {
    ScorerSpec spec;
    spec.input_size = input_size;
    spec.seed = seed;
    spec.n_labels = n_labels > 0 ? n_labels : label_count;
    if (kind == "precomputed") {
      spec.kind = ScorerKind::precomputed;
      spec.precomputed = std::make_shared<ScoreMatrix>(read_scores_csv(read_file(scores_csv)));
    }
    validate(spec);
    return spec;
  }
};

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<std::string> read_lines(const fs::path& path) {
  const auto bytes = read_file(path);
  std::vector<std::string> out;
  std::string line;
  for (auto c : bytes) {
    if (c == '\n') {
      if (!line.empty()) out.push_back(line);
      line.clear();
    } else if (c != '\r') {
      line.push_back(static_cast<char>(c));
    }
  }
  if (!line.empty()) out.push_back(line);
  return out;
}

std::string percent_change(double value, double baseline) {
  if (baseline == 0) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", 100.0 * (value - baseline) / baseline);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resolution-scalable image codestreams with bandwidth-optimal streaming"};
  app.require_subcommand(1);

  // encode
  std::string in_path, out_path;
  std::optional<std::uint32_t> alpha;
  auto* encode_cmd = app.add_subcommand("encode", "Encode a PGM into an .islc codestream");
  encode_cmd->add_option("--in", in_path, "input PGM")->required();
  encode_cmd->add_option("--out", out_path, "output .islc")->required();
  encode_cmd->add_option("--alpha", alpha, "smallest-resolution lower bound (default $ISLE_ALPHA or 32)")
      ->check(CLI::Range(1, 0xffff));

  // decode
  std::optional<int> decode_d;
  auto* decode_cmd = app.add_subcommand("decode", "Decode an .islc (possibly truncated) into a PGM");
  decode_cmd->add_option("--in", in_path, "input .islc")->required();
  decode_cmd->add_option("--out", out_path, "output PGM")->required();
  decode_cmd->add_option("--d", decode_d, "decomposition to reconstruct (default: highest available)");

  // inspect
  bool as_json = false;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print header, ladder and segment sizes");
  inspect_cmd->add_option("--in", in_path, "input .islc")->required();
  inspect_cmd->add_flag("--json", as_json, "emit JSON");

  // truncate
  int truncate_d = 0;
  auto* truncate_cmd = app.add_subcommand("truncate", "Keep only the prefix needed for decomposition d");
  truncate_cmd->add_option("--in", in_path, "input .islc")->required();
  truncate_cmd->add_option("--out", out_path, "output .islc")->required();
  truncate_cmd->add_option("--d", truncate_d, "decomposition to keep")->required();

  // optimize
  std::string val_dir, labels_path, report_path;
  double significance = 0.05;
  ScorerFlags optimize_scorer;
  auto* optimize_cmd = app.add_subcommand("optimize", "Select the optimal decomposition on a validation set");
  optimize_cmd->add_option("--val-dir", val_dir, "directory of full .islc streams")->required();
  optimize_cmd->add_option("--labels", labels_path, "labels CSV")->required();
  optimize_cmd->add_option("--significance", significance, "one-tailed t-test threshold")->check(CLI::Range(0.0, 1.0));
  optimize_cmd->add_option("--report", report_path, "write the JSON report here");
  optimize_scorer.add_to(optimize_cmd);

  // serve
  std::string store_dir, bind_address = "127.0.0.1:7878";
  auto* serve_cmd = app.add_subcommand("serve", "Serve a directory of .islc files");
  serve_cmd->add_option("--store", store_dir, "directory of <asset_id>.islc")->required();
  serve_cmd->add_option("--bind", bind_address, "host:port (port 0 picks one)");

  // fetch
  std::string address, asset_id, decoded_path;
  int fetch_d = -1;
  auto* fetch_cmd = app.add_subcommand("fetch", "Fetch one asset at decomposition d");
  fetch_cmd->add_option("--addr", address, "server host:port")->required();
  fetch_cmd->add_option("--asset", asset_id, "asset id")->required();
  fetch_cmd->add_option("--d", fetch_d, "decomposition, -1 for the full stream")->check(CLI::Range(-1, 127));
  fetch_cmd->add_option("--out", out_path, "write the received .islc here")->required();
  fetch_cmd->add_option("--decode-out", decoded_path, "also decode to this PGM");

  // bench
  std::string assets_path;
  int bench_d = -1, workers = 1;
  bool no_baseline = false;
  ScorerFlags bench_scorer;
  auto* bench_cmd = app.add_subcommand("bench", "Measure bytes, decode time and throughput");
  bench_cmd->add_option("--addr", address, "server host:port")->required();
  bench_cmd->add_option("--assets", assets_path, "file with one asset id per line")->required();
  bench_cmd->add_option("--d", bench_d, "decomposition, -1 for the full stream")->check(CLI::Range(-1, 127));
  bench_cmd->add_option("--workers", workers, "concurrent pipelines")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--report", report_path, "write the JSON report here");
  bench_cmd->add_flag("--no-baseline", no_baseline, "skip the full-stream comparison row");
  bench_scorer.add_to(bench_cmd);

  // gen-synthetic
  std::size_t gen_n = 100;
  std::uint32_t gen_size = 512;
  int gen_labels = 8;
  std::uint64_t gen_seed = 7;
  std::string out_dir;
  bool gen_encode = false;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a seeded synthetic labelled corpus");
  gen_cmd->add_option("--n", gen_n, "image count (>= 20)")->check(CLI::Range(20, 1000000));
  gen_cmd->add_option("--size", gen_size, "square image size (>= 64)")->check(CLI::Range(64, 65535));
  gen_cmd->add_option("--labels", gen_labels, "label count")->check(CLI::Range(1, 255));
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("--out-dir", out_dir, "output directory")->required();
  gen_cmd->add_flag("--encode", gen_encode, "also write <id>.islc next to each PGM");
  gen_cmd->add_option("--alpha", alpha, "alpha for --encode")->check(CLI::Range(1, 0xffff));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (encode_cmd->parsed()) {
      const auto a = alpha ? *alpha : default_alpha();
      const auto img = read_pgm(read_file(in_path));
      write_file_atomic(out_path, serialize(encode(img, a)));
    } else if (decode_cmd->parsed()) {
      const auto cs = parse(read_file(in_path));
      const int d = decode_d.value_or(cs.max_available_d());
      write_file_atomic(out_path, write_pgm(decode_partial(cs, d)));
    } else if (inspect_cmd->parsed()) {
      const auto cs = parse(read_file(in_path));
      std::cout << (as_json ? inspect_json(cs).dump(2) + "\n" : inspect_text(cs));
    } else if (truncate_cmd->parsed()) {
      const auto cs = parse(read_file(in_path));
      write_file_atomic(out_path, serialize(truncate(cs, truncate_d)));
    } else if (optimize_cmd->parsed()) {
      optimize_scorer.check();
      const auto labels = read_labels_csv(read_file(labels_path));
      const auto store = load_store(val_dir);
      if (store.empty()) fail(ErrorKind::validation, "no .islc files in " + val_dir);
      std::vector<AssetStream> streams;
      for (const auto& [id, cs] : store) streams.push_back({id, cs});
      const auto spec = optimize_scorer.build(static_cast<int>(labels.label_names.size()));
      const auto report = select_optimal(streams, labels, spec, streams.front().stream.plan(), significance);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      const auto j = to_json(report);
      if (!report_path.empty()) write_json(report_path, j);
      std::cout << "chosen_d " << report.chosen_d << " (architecture floor " << report.d_min_architecture << ", "
                << report.n_levels << " levels)\n";
      for (const auto& e : report.per_decomposition) {
        std::printf("  d=%d %ux%u  mean AUROC %.4f  p=%.4g%s\n", e.d, e.width, e.height, e.auroc.mean,
                    e.t_test.p_value, e.passes ? "" : "  *");
      }
    } else if (serve_cmd->parsed()) {
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      StreamServer server{fs::path(store_dir)};
      server.start(bind_address);
      std::cout << "serving " << server.store().size() << " assets on port " << server.port() << std::endl;
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
    } else if (fetch_cmd->parsed()) {
      auto fetched = fetch(address, asset_id, fetch_d);
      if (!decoded_path.empty()) write_file_atomic(decoded_path, write_pgm(decode(fetched.stream)));
      write_file_atomic(out_path, serialize(fetched.stream));
      std::cout << "received " << fetched.bytes_transferred << " bytes (d=" << fetched.stream.max_available_d()
                << " of " << fetched.stream.n_levels() << ")\n";
    } else if (bench_cmd->parsed()) {
      bench_scorer.check();
      const auto assets = read_lines(assets_path);
      if (assets.empty()) fail(ErrorKind::validation, "asset list is empty");
      int label_count = bench_scorer.n_labels;
      if (label_count == 0) label_count = 1;
      const auto spec = bench_scorer.build(label_count);

      struct Row {
        std::string policy;
        TransferMetrics metrics;
      };
      std::vector<Row> rows;
      if (!no_baseline && bench_d != -1) rows.push_back({"full", run_benchmark(address, assets, -1, spec, workers)});
      rows.push_back({bench_d == -1 ? "full" : "d=" + std::to_string(bench_d),
                      run_benchmark(address, assets, bench_d, spec, workers)});

      Json j_rows = Json::array();
      std::printf("%-8s %20s %16s %20s\n", "policy", "data transferred (B)", "decode time (s)", "throughput (img/s)");
      for (const auto& r : rows) {
        auto jr = to_json(r.metrics);
        jr["policy"] = r.policy;
        std::string bytes_change, decode_change, throughput_change;
        if (&r != &rows.front()) {
          const auto& base = rows.front().metrics;
          bytes_change = percent_change(r.metrics.bytes_transferred, base.bytes_transferred);
          decode_change = percent_change(r.metrics.decode_time_s, base.decode_time_s);
          throughput_change = percent_change(r.metrics.throughput, base.throughput);
          jr["change_vs_full_pct"] = {
              {"data_transferred", 100.0 * (double(r.metrics.bytes_transferred) - double(base.bytes_transferred)) /
                                       double(base.bytes_transferred)},
              {"decode_time", 100.0 * (r.metrics.decode_time_s - base.decode_time_s) / base.decode_time_s},
              {"throughput", 100.0 * (r.metrics.throughput - base.throughput) / base.throughput},
          };
        }
        std::printf("%-8s %12llu %-7s %9.4f %-6s %11.2f %-8s\n", r.policy.c_str(),
                    static_cast<unsigned long long>(r.metrics.bytes_transferred), bytes_change.c_str(),
                    r.metrics.decode_time_s, decode_change.c_str(), r.metrics.throughput, throughput_change.c_str());
        j_rows.push_back(jr);
      }
      if (!report_path.empty()) {
        write_json(report_path, {{"assets", assets.size()}, {"workers", workers}, {"rows", j_rows}});
      }
    } else if (gen_cmd->parsed()) {
      const auto a = alpha ? *alpha : default_alpha();
      const auto corpus = make_synthetic_corpus(gen_n, gen_size, gen_labels, gen_seed);
      fs::create_directories(out_dir);
      std::string listing;
      for (std::size_t i = 0; i < corpus.images.size(); ++i) {
        const auto& id = corpus.asset_ids[i];
        write_file_atomic(fs::path(out_dir) / (id + ".pgm"), write_pgm(corpus.images[i]));
        if (gen_encode) write_file_atomic(fs::path(out_dir) / (id + ".islc"), serialize(encode(corpus.images[i], a)));
        listing += id + "\n";
      }
      write_file_atomic(fs::path(out_dir) / "labels.csv", write_labels_csv(corpus.labels));
      write_file_atomic(fs::path(out_dir) / "assets.txt", listing);
      std::cout << "wrote " << corpus.images.size() << " images to " << out_dir << "\n";
    }
  } catch (const BenchmarkError& e) {
    std::cerr << "error: " << e.what() << " (" << e.partial().images_processed << " images completed)\n";
    return exit_code_for(e.kind());
  } catch (const Error& e) {
    std::cerr << "error: " << (e.kind() == ErrorKind::range ? "RANGE: " : "") << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
