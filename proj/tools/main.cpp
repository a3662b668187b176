// Command-line front end: generate / train / eval / ablate / gradcheck.
// Exit codes: 0 success, 1 usage or config error, 2 numeric failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trn/harness.hpp"
#include "trn/trn.hpp"

namespace {

using namespace trn;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
}

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> ld;
};

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) apply_config_file(cfg, opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.ld) cfg.decoder_steps = *opts.ld;
  return cfg;
}

int cmd_generate(const CommonOpts& opts, const std::string& out_path) {
  RunConfig cfg = resolve_config(opts);
  StreamDataset ds = generate(cfg.generator_config());
  save_dataset(ds, out_path);
  std::vector<std::size_t> histogram(cfg.num_actions + 1, 0);
  for (const auto& v : ds.videos)
    for (std::uint8_t lab : v.labels) histogram[lab] += 1;
  std::printf("wrote %s: %zu videos, %zu frames, D=%zu, K=%zu\n", out_path.c_str(),
              ds.videos.size(), ds.total_frames(), ds.feature_dim, ds.num_actions);
  for (std::size_t c = 0; c < histogram.size(); ++c)
    std::printf("class %zu frames %zu\n", c, histogram[c]);
  return 0;
}

template <typename S>
int run_train(const RunConfig& cfg, ModelKind kind, const std::string& data_path,
              const std::string& out_path) {
  StreamDataset data = load_dataset_any(data_path);
  std::ostringstream log;
  AnyModel<S> model = train_model<S>(cfg, kind, data, &log);
  std::fputs(log.str().c_str(), stdout);
  save_checkpoint(model, out_path);
  write_text_file(out_path + ".log", log.str());
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& model_name,
              const std::string& data_path, const std::string& out_path) {
  RunConfig cfg = resolve_config(opts);
  ModelKind kind = parse_model_kind(model_name);
  if (cfg.precision == "f32") return run_train<float>(cfg, kind, data_path, out_path);
  return run_train<double>(cfg, kind, data_path, out_path);
}

int cmd_eval(const CommonOpts& opts, const std::string& ckpt_path,
             const std::string& data_path, const std::string& out_stem, bool deciles,
             bool anticipation) {
  RunConfig cfg = resolve_config(opts);
  StreamDataset data = load_dataset_any(data_path);
  MetricReport rep;
  if (cfg.precision == "f32") {
    AnyModel<float> model = load_checkpoint<float>(ckpt_path);
    rep = evaluate_report(model, data, deciles, anticipation);
  } else {
    AnyModel<double> model = load_checkpoint<double>(ckpt_path);
    rep = evaluate_report(model, data, deciles, anticipation);
  }
  std::string text = render_report_text(rep);
  std::fputs(text.c_str(), stdout);
  write_text_file(out_stem + ".txt", text);
  write_text_file(out_stem + ".kv", render_report_kv(rep));
  return 0;
}

int cmd_ablate(const CommonOpts& opts, const std::string& ld_list,
               const std::string& seed_list, const std::string& train_path,
               const std::string& test_path, const std::string& out_stem) {
  RunConfig cfg = resolve_config(opts);
  std::vector<std::size_t> lds;
  for (const auto& tok : split_list(ld_list)) lds.push_back(detail::parse_count("ld", tok));
  std::vector<std::uint64_t> seeds;
  for (const auto& tok : split_list(seed_list)) seeds.push_back(detail::parse_u64("seeds", tok));
  if (lds.empty()) throw ConfigError("ablate: --ld list is empty");
  if (seeds.empty()) throw ConfigError("ablate: --seeds list is empty");

  StreamDataset train_ds = load_dataset_any(train_path);
  StreamDataset test_ds = load_dataset_any(test_path);
  AblationTable table;
  if (cfg.precision == "f32")
    table = run_ablation<float>(cfg, train_ds, test_ds, lds, seeds, &std::cout);
  else
    table = run_ablation<double>(cfg, train_ds, test_ds, lds, seeds, &std::cout);
  std::string text = render_ablation_text(table);
  std::fputs(text.c_str(), stdout);
  write_text_file(out_stem + ".txt", text);
  write_text_file(out_stem + ".kv", render_ablation_kv(table));
  return 0;
}

int cmd_gradcheck(const CommonOpts& opts, bool corrupt) {
  std::uint64_t seed = opts.seed ? *opts.seed : 1;
  GradCheckReport report = run_gradcheck(seed, 1e-4, corrupt);
  for (const auto& line : report.lines)
    std::printf("%-12s %-22s %10.3e %s\n", line.model.c_str(), line.block.c_str(),
                line.max_rel_err, line.pass ? "ok" : "FAIL");
  std::printf("gradcheck %s\n", report.ok ? "passed" : "FAILED");
  return report.ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal recurrent network: online action detection on feature streams"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string out_path, model_name = "trn", data_path, ckpt_path, test_path;
  std::string ld_list, seed_list = "1";
  bool deciles = false, anticipation = false, corrupt = false;

  auto add_common = [&](CLI::App* sub, bool with_ld = false) {
    sub->add_option("--config", opts.config_path, "key = value config file");
    sub->add_option("--seed", opts.seed, "seed override");
    if (with_ld) sub->add_option("--ld", opts.ld, "decoder steps override");
  };

  CLI::App* gen = app.add_subcommand("generate", "generate a synthetic dataset");
  add_common(gen);
  gen->add_option("--out", out_path, "output dataset path")->required();

  CLI::App* tr = app.add_subcommand("train", "train a model on a dataset");
  add_common(tr, true);
  tr->add_option("--model", model_name, "trn | lstm | ed | framewise | rnn-offline");
  tr->add_option("--out", out_path, "output checkpoint path")->required();
  tr->add_option("dataset", data_path, "training dataset (.oads or .csv)")->required();

  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  add_common(ev);
  ev->add_option("--out", out_path, "report stem; writes <stem>.txt and <stem>.kv")
      ->required();
  ev->add_flag("--deciles", deciles, "add the per-decile cAP section");
  ev->add_flag("--anticipation", anticipation, "add the anticipation section");
  ev->add_option("checkpoint", ckpt_path, "TRN1 checkpoint")->required();
  ev->add_option("dataset", data_path, "evaluation dataset")->required();

  CLI::App* ab = app.add_subcommand("ablate", "decoder-steps ablation over a seed list");
  add_common(ab);
  ab->add_option("--ld", ld_list, "comma-separated decoder step counts")->required();
  ab->add_option("--seeds", seed_list, "comma-separated training seeds");
  ab->add_option("--out", out_path, "table stem; writes <stem>.txt and <stem>.kv")
      ->required();
  ab->add_option("train_dataset", data_path, "training dataset")->required();
  ab->add_option("test_dataset", test_path, "evaluation dataset")->required();

  CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  add_common(gc);
  gc->add_flag("--corrupt", corrupt, "test hook: inject a gradient error, must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(opts, out_path);
    if (tr->parsed()) return cmd_train(opts, model_name, data_path, out_path);
    if (ev->parsed())
      return cmd_eval(opts, ckpt_path, data_path, out_path, deciles, anticipation);
    if (ab->parsed())
      return cmd_ablate(opts, ld_list, seed_list, data_path, test_path, out_path);
    if (gc->parsed()) return cmd_gradcheck(opts, corrupt);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
