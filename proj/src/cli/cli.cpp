#include "snlm/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "snlm/corpus.hpp"
#include "snlm/evaluation.hpp"
#include "snlm/model_file.hpp"
#include "snlm/partitioning.hpp"
#include "snlm/trainer.hpp"

namespace snlm {
namespace {

struct Options {
  // shared
  std::string corpus, vocab, output, model, valid, nbest, log;
  std::uint64_t seed = 1;
  int threads = 1;

  // vocab
  std::uint64_t min_count = 1;
  std::size_t max_size = 0;

  // classes
  std::string method = "brown";
  int num_classes = 0;
  int iterations = 20;

  // train
  int order = 5;
  int dim = 500;
  std::string regime = "class";
  bool diagonal = true;
  std::string algorithm = "nce";
  int k = 10;
  std::string classes_file, tree_file;
  double lr = 0.1;
  int batch = 64;
  int epochs = 10;
  double l2 = 1e-5;
  double valid_fraction = 0.05;

  // score / bench
  bool unnormalised = false;
  int repeats = 1;
};

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw Error("cannot write " + path);
  return file;
}

Vocabulary vocabulary_for(const Options& o) {
  if (!o.vocab.empty()) return Vocabulary::load(o.vocab);
  if (o.corpus.empty()) throw Error("need --vocab or --corpus");
  VocabularyOptions vo;
  vo.min_count = o.min_count;
  if (o.max_size > 0) vo.max_size = o.max_size;
  return build_vocabulary(o.corpus, vo);
}

void print_config(std::ostream& out, const ModelConfig& c) {
  out << "order\t" << c.order << "\n"
      << "dim\t" << c.dim << "\n"
      << "regime\t" << regime_name(c.regime) << "\n"
      << "diagonal\t" << (c.diagonal_contexts ? "true" : "false") << "\n";
}

int run_vocab(const Options& o, std::ostream& out) {
  if (o.corpus.empty()) throw Error("vocab: --corpus is required");
  VocabularyOptions vo;
  vo.min_count = o.min_count;
  if (o.max_size > 0) vo.max_size = o.max_size;
  const auto vocab = build_vocabulary(o.corpus, vo);
  std::ofstream file;
  vocab.write(open_output(o.output, file, out));
  return kExitOk;
}

WordClassing make_classing(const Options& o, const Vocabulary& vocab, const std::vector<Sentence>& corpus) {
  const int K = o.num_classes > 0 ? o.num_classes : default_num_classes(vocab.size());
  if (o.method == "binning") return frequency_binning(unigram_distribution(vocab), K);
  if (o.method == "brown") {
    if (corpus.empty()) throw Error("brown clustering needs --corpus");
    const auto bigrams = extract_instances(corpus, vocab, 2);
    return brown_clustering(bigrams, vocab, K, o.iterations);
  }
  throw Error("unknown class method '" + o.method + "'");
}

int run_classes(const Options& o, std::ostream& out) {
  const auto vocab = vocabulary_for(o);
  std::ofstream file;
  std::ostream& dst = open_output(o.output, file, out);
  if (o.method == "huffman") {
    huffman_tree(vocab.counts()).write(dst, vocab);
    return kExitOk;
  }
  const auto corpus = o.corpus.empty() ? std::vector<Sentence>{} : read_sentences(o.corpus);
  make_classing(o, vocab, corpus).write(dst, vocab);
  return kExitOk;
}

int run_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.corpus.empty()) throw Error("train: --corpus is required");
  if (o.output.empty()) throw Error("train: --output is required");
  auto sentences = read_sentences(o.corpus);
  const auto vocab = vocabulary_for(o);

  std::vector<Sentence> valid;
  if (!o.valid.empty()) {
    valid = read_sentences(o.valid);
  } else if (o.valid_fraction > 0.0) {
    const auto held = static_cast<std::size_t>(std::floor(o.valid_fraction * static_cast<double>(sentences.size())));
    if (held > 0 && held < sentences.size()) {
      valid.assign(sentences.end() - static_cast<std::ptrdiff_t>(held), sentences.end());
      sentences.resize(sentences.size() - held);
    }
  }

  ModelConfig cfg;
  cfg.order = o.order;
  cfg.dim = o.dim;
  cfg.regime = parse_regime(o.regime);
  cfg.diagonal_contexts = o.diagonal;

  std::shared_ptr<const WordClassing> classing;
  std::shared_ptr<const VocabularyTree> tree;
  if (cfg.regime == Regime::class_factored) {
    classing = std::make_shared<WordClassing>(!o.classes_file.empty() ? WordClassing::load(o.classes_file, vocab)
                                                                      : make_classing(o, vocab, sentences));
  } else if (cfg.regime == Regime::tree_factored) {
    tree = std::make_shared<VocabularyTree>(!o.tree_file.empty() ? VocabularyTree::load(o.tree_file, vocab)
                                                                  : huffman_tree(vocab.counts()));
  }
  Model model = make_model(cfg, vocab, classing, tree);

  TrainingConfig tc;
  tc.algorithm = parse_algorithm(o.algorithm);
  tc.learning_rate = o.lr;
  tc.minibatch_size = o.batch;
  tc.epochs = o.epochs;
  tc.l2_strength = o.l2;
  tc.noise_samples = o.k;
  tc.rng_seed = o.seed;
  tc.validation_fraction = o.valid_fraction;

  const auto train_set = extract_instances(sentences, vocab, cfg.order);
  const auto valid_set = extract_instances(valid, vocab, cfg.order);
  initialize_parameters(model, vocab.counts(), o.seed);

  std::ofstream log_file;
  if (!o.log.empty()) {
    log_file.open(o.log, std::ios::app);
    if (!log_file) throw Error("cannot write " + o.log);
  }
  err << "# training " << regime_name(cfg.regime) << " model with " << algorithm_name(tc.algorithm) << ": |V|="
      << vocab.size() << " n=" << cfg.order << " D=" << cfg.dim << " instances=" << train_set.size() << "\n";
  auto log = train(model, train_set, valid_set, tc, [&](const EpochStats& e) {
    err << "epoch " << e.epoch << "\ttrain_ppl " << e.train_ppl << "\tvalid_ppl " << e.valid_ppl << "\tlr "
        << e.learning_rate << "\t" << e.seconds << "s\n";
    if (log_file)
      log_file << e.epoch << '\t' << e.train_ppl << '\t' << e.valid_ppl << '\t' << e.learning_rate << '\t' << e.seconds
               << '\n' << std::flush;
  });
  const auto layout = save_model(o.output, vocab, model);
  out << "saved " << o.output << " (" << layout.total() << " bytes)\n";
  return kExitOk;
}

int run_ppl(const Options& o, std::ostream& out) {
  if (o.model.empty() || o.corpus.empty()) throw Error("ppl: --model and --corpus are required");
  const auto lm = load_model(o.model);
  const auto report = perplexity(lm.model, read_sentences(o.corpus), lm.vocab, o.threads);
  out << std::setprecision(17) << "sentences\t" << report.sentences << "\n"
      << "tokens\t" << report.token_count << "\n"
      << "oov\t" << report.oov_count << "\n"
      << "log_prob\t" << report.total_log_prob << "\n"
      << "perplexity\t" << report.perplexity << "\n"
      << std::setprecision(6) << "macs_per_query\t" << report.macs_per_query << "\n"
      << "queries_per_second\t" << report.queries_per_second << "\n";
  return kExitOk;
}

int run_score(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty() || o.nbest.empty()) throw Error("score: --model and --nbest are required");
  const auto lm = load_model(o.model);
  std::ifstream in(o.nbest);
  if (!in) throw Error("cannot read " + o.nbest);
  const auto result = score_nbest(lm.model, in, lm.vocab, o.unnormalised ? ScoreMode::unnormalised : ScoreMode::normalised);
  for (const auto& e : result.errors) err << o.nbest << ": " << e << "\n";
  std::ofstream file;
  write_nbest(open_output(o.output, file, out), result);
  return result.errors.empty() ? kExitOk : kExitData;
}

int run_info(const Options& o, std::ostream& out) {
  if (o.model.empty()) throw Error("info: --model is required");
  const auto lm = load_model(o.model);
  std::ostringstream sink;
  const auto layout = write_model(sink, lm.vocab, lm.model);
  const auto m = memory_estimate(lm.model, lm.vocab);
  print_config(out, lm.model.config());
  out << "vocabulary\t" << lm.vocab.size() << "\n";
  if (lm.model.classing()) out << "classes\t" << lm.model.classing()->num_classes() << "\n";
  if (lm.model.tree()) out << "tree_max_depth\t" << lm.model.tree()->max_depth() << "\n";
  out << "params_embeddings\t" << m.embeddings << "\n"
      << "params_biases\t" << m.biases << "\n"
      << "params_contexts\t" << m.contexts << "\n"
      << "params_output_units\t" << m.output_units << "\n"
      << "parameter_count\t" << m.parameter_count << "\n"
      << "payload_bytes\t" << m.payload_bytes << "\n"
      << "string_bytes\t" << m.string_bytes << "\n"
      << "estimated_bytes\t" << m.bytes << "\n"
      << "serialized_payload_bytes\t" << layout.payload_bytes << "\n"
      << "serialized_file_bytes\t" << layout.total() << "\n";
  return kExitOk;
}

int run_bench(const Options& o, std::ostream& out) {
  if (o.model.empty() || o.corpus.empty()) throw Error("bench: --model and --corpus are required");
  const auto lm = load_model(o.model);
  const auto queries = extract_instances(read_sentences(o.corpus), lm.vocab, lm.model.config().order);
  out << "mode\tqueries\tseconds\tqueries_per_second\tprojection_macs\toutput_macs\n";
  for (const auto& r : query_benchmark(lm.model, queries, o.repeats))
    out << r.mode << '\t' << r.queries << '\t' << r.seconds << '\t' << r.queries_per_second << '\t'
        << r.projection_macs_per_query << '\t' << r.output_macs_per_query << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"snlm: scalable n-gram neural language models"};
  app.require_subcommand(1);

  auto* vocab = app.add_subcommand("vocab", "build a vocabulary file from a corpus");
  vocab->add_option("--corpus", o.corpus, "tokenized corpus, one sentence per line")->required();
  vocab->add_option("--min-count", o.min_count, "keep tokens seen at least this often")->check(CLI::PositiveNumber);
  vocab->add_option("--max-size", o.max_size, "keep at most this many regular tokens (0 = all)");
  vocab->add_option("--output,-o", o.output, "output vocabulary file (default stdout)");

  auto* classes = app.add_subcommand("classes", "partition the vocabulary or build a Huffman tree");
  classes->add_option("--method", o.method, "brown | binning | huffman")
      ->check(CLI::IsMember({"brown", "binning", "huffman"}));
  classes->add_option("--corpus", o.corpus, "corpus (required for brown; builds the vocabulary if --vocab is absent)");
  classes->add_option("--vocab", o.vocab, "vocabulary file");
  classes->add_option("--min-count", o.min_count, "vocabulary threshold when building from --corpus");
  classes->add_option("--classes", o.num_classes, "number of classes K (default ceil(sqrt(|V|)))");
  classes->add_option("--iterations", o.iterations, "maximum exchange sweeps for brown");
  classes->add_option("--seed", o.seed, "random seed (unused: all methods are deterministic)");
  classes->add_option("--output,-o", o.output, "output classes/tree file (default stdout)");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--corpus", o.corpus, "training corpus")->required();
  train_cmd->add_option("--valid", o.valid, "validation corpus (default: tail of the training corpus)");
  train_cmd->add_option("--valid-fraction", o.valid_fraction, "fraction of sentences held out when --valid is absent");
  train_cmd->add_option("--vocab", o.vocab, "vocabulary file (default: built from --corpus)");
  train_cmd->add_option("--min-count", o.min_count, "vocabulary threshold when building from --corpus");
  train_cmd->add_option("--output,-o", o.output, "output model file")->required();
  train_cmd->add_option("--order", o.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--dim", o.dim, "embedding width D")->capture_default_str();
  train_cmd->add_option("--regime", o.regime, "standard | class | tree")
      ->check(CLI::IsMember({"standard", "class", "tree"}))
      ->capture_default_str();
  train_cmd->add_option("--diagonal", o.diagonal, "diagonal context matrices")->capture_default_str();
  train_cmd->add_option("--algorithm", o.algorithm, "sgd | nce")->check(CLI::IsMember({"sgd", "nce"}))->capture_default_str();
  train_cmd->add_option("--k", o.k, "noise samples per instance")->capture_default_str();
  train_cmd->add_option("--classes-file", o.classes_file, "word classes for the class regime");
  train_cmd->add_option("--tree-file", o.tree_file, "vocabulary tree for the tree regime (default Huffman)");
  train_cmd->add_option("--class-method", o.method, "brown | binning when no --classes-file")
      ->check(CLI::IsMember({"brown", "binning"}));
  train_cmd->add_option("--classes", o.num_classes, "K when classes are computed");
  train_cmd->add_option("--lr", o.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--batch", o.batch, "minibatch size")->capture_default_str();
  train_cmd->add_option("--epochs", o.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--l2", o.l2, "per-example L2 strength")->capture_default_str();
  train_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  train_cmd->add_option("--threads", o.threads, "worker threads (training is single-worker)")->capture_default_str();
  train_cmd->add_option("--log", o.log, "append per-epoch metrics to this file");

  auto* ppl = app.add_subcommand("ppl", "perplexity of a corpus");
  ppl->add_option("--model,-m", o.model, "model file")->required();
  ppl->add_option("--corpus", o.corpus, "test corpus")->required();
  ppl->add_option("--threads", o.threads, "evaluation threads")->check(CLI::PositiveNumber);
  ppl->add_option("--seed", o.seed, "random seed (unused)");

  auto* score = app.add_subcommand("score", "score an n-best list");
  score->add_option("--model,-m", o.model, "model file")->required();
  score->add_option("--nbest", o.nbest, "n-best file: sent_id ||| hypothesis ||| features")->required();
  score->add_flag("--unnormalised", o.unnormalised, "sum raw scores instead of log-probabilities");
  score->add_option("--output,-o", o.output, "output file (default stdout)");
  score->add_option("--seed", o.seed, "random seed (unused)");

  auto* info = app.add_subcommand("info", "print model configuration and memory accounting");
  info->add_option("--model,-m", o.model, "model file")->required();

  auto* bench = app.add_subcommand("bench", "query throughput and multiply-accumulate counts");
  bench->add_option("--model,-m", o.model, "model file")->required();
  bench->add_option("--corpus", o.corpus, "queries, as sentences")->required();
  bench->add_option("--repeats", o.repeats, "passes over the queries");
  bench->add_option("--seed", o.seed, "random seed (unused)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (*vocab) return run_vocab(o, out);
    if (*classes) return run_classes(o, out);
    if (*train_cmd) return run_train(o, out, err);
    if (*ppl) return run_ppl(o, out);
    if (*score) return run_score(o, out, err);
    if (*info) return run_info(o, out);
    if (*bench) return run_bench(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace snlm
