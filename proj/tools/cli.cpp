#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "tabletop/checkpoint.hpp"
#include "tabletop/dataset.hpp"
#include "tabletop/models.hpp"
#include "tabletop/pose.hpp"
#include "tabletop/synth.hpp"
#include "tabletop/train.hpp"

namespace tabletop::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
public:
  using Error::Error;
};

struct PreprocessArgs {
  std::string input, output, shifts = "default";
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  std::string output;
  SynthConfig config;
};

struct TrainArgs {
  std::string task, object, data, out, history;
  TrainConfig config;
  std::optional<std::size_t> halvings;
};

struct EvalArgs {
  std::string ckpt, data, object, split = "test";
  bool allow_train_eval = false;
};

struct PredictArgs {
  std::string ckpt, image;
};

struct VizArgs {
  std::string ckpt, image, out;
};

struct PoseArgs {
  std::string object, angle_class, centroid, home_table;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::size_t parse_angle_class_arg(const std::string& s) {
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '7') return static_cast<std::size_t>(s[0] - '0');
  return parse_angle_label(s);
}

Point2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("--centroid expects X,Y");
  try {
    std::size_t used = 0;
    const double x = std::stod(s.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("x");
    const auto ys = s.substr(comma + 1);
    const double y = std::stod(ys, &used);
    if (used != ys.size()) throw std::invalid_argument("y");
    return {x, y};
  } catch (const std::logic_error&) {
    throw UsageError("--centroid expects X,Y (got '" + s + "')");
  }
}

std::string class_name(const Checkpoint& ckpt, std::size_t k) {
  if (ckpt.metadata.task == "recognition" && k < kObjectClasses) return to_string(kAllObjects[k]);
  if (ckpt.spec.classes == kAngleClasses) return angle_label(k);
  return std::to_string(k);
}

Manifest read_archive_manifest(const std::string& data) {
  const auto path = fs::path(data) / std::string(kManifestFile);
  if (!fs::exists(path)) throw ValidationError("no " + std::string(kManifestFile) + " in " + data);
  auto m = Manifest::read(path);
  m.validate();
  return m;
}

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out, std::ostream& err) {
  ArchiveOptions opt;
  opt.shifts = parse_shift_list(a.shifts);
  opt.val_fraction = a.val_fraction;
  opt.seed = a.seed;
  const auto report = build_archive(a.input, a.output, opt);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  const auto& m = report.manifest;
  out << m.rows.size() << " samples (train " << m.count(Split::train) << ", val " << m.count(Split::val) << ", test "
      << m.count(Split::test) << ") written to " << a.output << '\n';
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto m = synth_generate(a.config, a.output);
  out << m.rows.size() << " images (train " << m.count(Split::train) << ", val " << m.count(Split::val)
      << ", test " << m.count(Split::test) << ") written to " << a.output << '\n';
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const Task task = parse_task(a.task);
  std::optional<ObjectKind> object;
  if (task == Task::angle) {
    if (a.object.empty()) throw UsageError("--task angle requires --object (one model per object)");
    object = parse_object(a.object);
  } else if (!a.object.empty()) {
    throw UsageError("--object only applies to --task angle");
  }
  a.config.validate();
  const std::size_t halvings = a.halvings.value_or(task == Task::recognition ? 1 : 0);

  const auto manifest = read_archive_manifest(a.data);
  const auto train_set = load_examples(a.data, manifest, Split::train, task, object, halvings);
  const auto val_set = load_examples(a.data, manifest, Split::val, task, object, halvings);
  if (train_set.empty() || val_set.empty()) throw ValidationError("archive has no train/val samples for this task");

  const auto& shape = train_set.front().image.shape();
  const auto spec = task == Task::recognition ? recognition_net(shape[1], shape[2])
                                              : model_for(*object, shape[1], shape[2]);
  Network<float> net(spec, a.config.seed);
  out << "training " << spec.name << " on " << train_set.size() << " samples (" << val_set.size()
      << " validation), input " << shape_string(shape) << ", " << spec.parameter_count() << " parameters\n";

  CheckpointMetadata meta;
  meta.task = to_string(task);
  meta.object = object ? to_string(*object) : "";
  meta.halvings = halvings;
  const auto result = train(net, train_set, val_set, a.config, meta, [&](const EpochRecord& r, Network<float>&) {
    out << "epoch " << r.epoch << ": loss " << fmt(r.train_loss) << ", train_acc " << fmt(r.train_acc)
        << ", val_acc " << fmt(r.val_acc) << '\n';
    return true;
  });

  save_checkpoint(result.best, a.out);
  const fs::path history = a.history.empty() ? fs::path(a.out).replace_extension(".history.csv") : fs::path(a.history);
  write_history_csv(history, result.history);
  out << "best epoch " << result.best.metadata.epoch << " (val_acc " << fmt(result.best.metadata.val_accuracy)
      << ") saved to " << a.out << "; history in " << history.string() << '\n';
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Split split = parse_split(a.split);
  if (split != Split::test && !a.allow_train_eval) {
    throw UsageError("evaluation on the " + a.split + " split needs --allow-train-eval (held-out H2 is 'test')");
  }
  const auto ckpt = load_checkpoint(a.ckpt);
  const Task task = ckpt.metadata.task.empty() ? (ckpt.spec.classes == kObjectClasses ? Task::recognition : Task::angle)
                                               : parse_task(ckpt.metadata.task);
  std::optional<ObjectKind> object;
  if (task == Task::angle) {
    const std::string name = a.object.empty() ? ckpt.metadata.object : a.object;
    if (name.empty()) throw UsageError("angle checkpoint has no object; pass --object");
    object = parse_object(name);
  }
  const auto manifest = read_archive_manifest(a.data);
  const auto samples = load_examples(a.data, manifest, split, task, object, ckpt.metadata.halvings);
  if (samples.empty()) throw ValidationError("no samples in split " + a.split);
  auto net = ckpt.restore();
  const auto r = evaluate(net, samples);

  out << "accuracy " << fmt(r.accuracy) << " (" << r.correct << "/" << r.total << ") on split " << a.split;
  if (object) out << " for " << to_string(*object);
  out << '\n' << "confusion (rows = true, columns = predicted):\n" << std::setw(8) << "";
  for (std::size_t j = 0; j < r.confusion.size(); ++j) out << std::setw(8) << class_name(ckpt, j);
  out << '\n';
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    out << std::setw(8) << class_name(ckpt, i);
    for (auto v : r.confusion[i]) out << std::setw(8) << v;
    out << '\n';
  }
  return kExitOk;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.ckpt);
  auto net = ckpt.restore();
  const auto image = load_image(a.image, ckpt.metadata.halvings);
  const auto probs = net.predict_probs(image);
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  out << "label " << class_name(ckpt, best) << '\n';
  for (std::size_t k = 0; k < probs.size(); ++k) out << class_name(ckpt, k) << ' ' << fmt(probs[k], 6) << '\n';
  return kExitOk;
}

int cmd_viz(const VizArgs& a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.ckpt);
  auto net = ckpt.restore();
  const auto image = load_image(a.image, ckpt.metadata.halvings);
  for (const auto& p : visualize_activations(net, image, a.out)) out << p.string() << '\n';
  return kExitOk;
}

int cmd_pose(const PoseArgs& a, std::ostream& out) {
  const auto object = parse_object(a.object);
  const auto k = parse_angle_class_arg(a.angle_class);
  const auto c = parse_point(a.centroid);
  const auto table = HomePoseTable::read(a.home_table);
  const auto t = home_transform(object, k, c, table);
  out << t.to_row_major_string() << '\n' << t.to_json() << '\n';
  return kExitOk;
}

std::string json_scalar_to_arg(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar_to_arg(e);
    return s;
  }
  return v.dump();
}

/// Expands `--config FILE` into explicit flags placed before the user's own,
/// so that command-line values win under the take-last policy.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  std::optional<std::string> config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config_path) return rest;
  if (rest.empty()) throw UsageError("--config given without a command");
  const std::string command = rest.front();
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(command);
  } catch (const CLI::OptionNotFound&) {
    throw UsageError("unknown command '" + command + "'");
  }

  std::ifstream in(*config_path);
  if (!in) throw UsageError("cannot open config " + *config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + *config_path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");

  std::vector<std::string> injected;
  const auto apply = [&](const nlohmann::json& obj) {
    for (const auto& [key, value] : obj.items()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      auto* opt = sub->get_option_no_throw(flag);
      if (!opt || flag == "--help") throw UsageError("config key '" + key + "' is not an option of '" + command + "'");
      if (value.is_boolean() && opt->get_expected_min() == 0) {
        if (value.get<bool>()) injected.push_back(flag);
        continue;
      }
      if (value.is_object() || value.is_null()) throw UsageError("config key '" + key + "' has an unsupported value");
      injected.push_back(flag);
      injected.push_back(json_scalar_to_arg(value));
    }
  };
  for (const auto& [key, value] : j.items()) {
    bool is_section = false;
    for (const auto* s : app.get_subcommands({})) is_section = is_section || s->get_name() == key;
    if (is_section) {
      if (!value.is_object()) throw UsageError("config section '" + key + "' must be an object");
      if (key == command) apply(value);
    }
  }
  nlohmann::json shared = nlohmann::json::object();
  for (const auto& [key, value] : j.items()) {
    bool is_section = false;
    for (const auto* s : app.get_subcommands({})) is_section = is_section || s->get_name() == key;
    if (!is_section) shared[key] = value;
  }
  // Shared keys first, then the command's own section, then the command line.
  std::vector<std::string> section = std::move(injected);
  injected.clear();
  apply(shared);
  std::vector<std::string> out{command};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), section.begin(), section.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tabletop object recognition, orientation classification and home-pose transforms", "tabletop"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "Mask, shift-augment and index a raw image directory");
  preprocess->add_option("--input", pre.input, "Directory of <name>.pgm images with <name>_mask.pgm masks")->required();
  preprocess->add_option("--output", pre.output, "Archive directory to create")->required();
  preprocess->add_option("--shifts", pre.shifts, "dx:dy,dx:dy,... or 'default' (24 shifts of ±5/±10 px)");
  preprocess->add_option("--val-fraction", pre.val_fraction, "Validation share of each H1 (object, angle) stratum");
  preprocess->add_option("--seed", pre.seed, "Split seed");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic tabletop archive");
  synth->add_option("--output", syn.output, "Archive directory to create")->required();
  synth->add_option("--per-cell", syn.config.per_cell, "Images per (object, angle, height)");
  synth->add_option("--resolution", syn.config.resolution, "Square image size in pixels (>= 32)");
  synth->add_option("--seed", syn.config.seed, "Generator seed");
  synth->add_option("--noise", syn.config.noise, "Gaussian noise sigma");
  synth->add_option("--instances", syn.config.instances_per_class, "Instances per object (1..10)");
  synth->add_option("--jitter", syn.config.position_jitter, "Max position jitter in pixels");
  synth->add_option("--val-fraction", syn.config.val_fraction, "Validation share of each H1 stratum");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a recognition or per-object angle model on H1");
  train_cmd->add_option("--task", tr.task, "recognition or angle")->required()->check(CLI::IsMember({"recognition", "angle"}));
  train_cmd->add_option("--object", tr.object, "mug, mouse or stapler (required for --task angle)");
  train_cmd->add_option("--data", tr.data, "Archive directory containing manifest.csv")->required();
  train_cmd->add_option("--out", tr.out, "Checkpoint file to write")->required();
  train_cmd->add_option("--history", tr.history, "History CSV (default: <out>.history.csv)");
  train_cmd->add_option("--epochs", tr.config.epochs, "Epochs");
  train_cmd->add_option("--batch-size", tr.config.batch_size, "Mini-batch size");
  train_cmd->add_option("--lr", tr.config.learning_rate, "RMSProp learning rate");
  train_cmd->add_option("--rho", tr.config.rmsprop_decay, "RMSProp decay");
  train_cmd->add_option("--rms-epsilon", tr.config.rmsprop_epsilon, "RMSProp epsilon");
  train_cmd->add_option("--seed", tr.config.seed, "Initialization and shuffling seed");
  train_cmd->add_option("--halvings", tr.halvings, "2x downsampling passes (default 1 for recognition, 0 for angle)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Accuracy and confusion matrix on the held-out H2 split");
  eval->add_option("--ckpt", ev.ckpt, "Checkpoint file")->required();
  eval->add_option("--data", ev.data, "Archive directory containing manifest.csv")->required();
  eval->add_option("--object", ev.object, "Object for angle checkpoints (default: from checkpoint)");
  eval->add_option("--split", ev.split, "test (default), val or train")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_flag("--allow-train-eval", ev.allow_train_eval, "Permit evaluating on train/val splits");

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Classify one image");
  predict->add_option("--ckpt", pr.ckpt, "Checkpoint file")->required();
  predict->add_option("--image", pr.image, "PGM image")->required();

  VizArgs vz;
  auto* viz = app.add_subcommand("viz", "Write one activation grid per conv layer");
  viz->add_option("--ckpt", vz.ckpt, "Checkpoint file")->required();
  viz->add_option("--image", vz.image, "PGM image")->required();
  viz->add_option("--out", vz.out, "Output directory")->required();

  PoseArgs po;
  auto* pose = app.add_subcommand("pose", "Homogeneous transform to an object's home pose");
  pose->add_option("--object", po.object, "mug, mouse or stapler")->required();
  pose->add_option("--angle-class", po.angle_class, "Predicted class: A1..A8 or 0..7")->required();
  pose->add_option("--centroid", po.centroid, "Current centroid X,Y")->required();
  pose->add_option("--home-table", po.home_table, "Home pose JSON")->required();

  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config")->description("JSON config file; command-line flags take precedence");
  }

  try {
    auto expanded = expand_config(args, app);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (preprocess->parsed()) return cmd_preprocess(pre, out, err);
    if (synth->parsed()) return cmd_synth(syn, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (eval->parsed()) return cmd_eval(ev, out);
    if (predict->parsed()) return cmd_predict(pr, out);
    if (viz->parsed()) return cmd_viz(vz, out);
    if (pose->parsed()) return cmd_pose(po, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckpointError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace tabletop::cli
