// Copyright 2026 The EVE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eve/probe.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "eve/numeric/layers.hpp"
#include "eve/numeric/optim.hpp"
#include "eve/rng.hpp"

namespace eve {

std::string_view probe_mode_name(ProbeMode m) {
  return m == ProbeMode::Multiclass ? "multiclass" : "multilabel";
}

ProbeMode parse_probe_mode(std::string_view name) {
  if (name == "multiclass") return ProbeMode::Multiclass;
  if (name == "multilabel") return ProbeMode::Multilabel;
  throw Error("unknown probe mode " + std::string(name) + " (expected multiclass or multilabel)");
}

void ProbeConfig::validate() const {
  if (depth < 0) throw Error("probe depth must be >= 0");
  if (hidden < 1) throw Error("probe hidden width must be >= 1");
  if (epochs < 1) throw Error("probe epochs must be >= 1");
  if (patience < 1) throw Error("probe patience must be >= 1");
  if (!(lr > 0.0)) throw Error("probe lr must be > 0");
  if (batch_size < 1) throw Error("probe batch_size must be >= 1");
}

nlohmann::json to_json(const ProbeConfig& c) {
  return {{"depth", c.depth},   {"hidden", c.hidden},     {"mode", std::string(probe_mode_name(c.mode))},
          {"epochs", c.epochs}, {"patience", c.patience}, {"lr", c.lr},
          {"batch_size", c.batch_size}, {"seed", c.seed}};
}

ProbeData make_probe_data(const nn::Matrix<double>& train_x, std::span<const EditExample> train,
                          const nn::Matrix<double>& valid_x, std::span<const EditExample> valid,
                          const nn::Matrix<double>& test_x, std::span<const EditExample> test,
                          ProbeMode mode) {
  std::set<std::string> names;
  for (auto split : {train, valid, test})
    for (const EditExample& e : split) {
      if (e.labels.empty()) throw LabelError("unlabeled example: probing needs a label on every example");
      if (mode == ProbeMode::Multiclass && e.labels.size() != 1)
        throw LabelError("multiclass probing needs exactly one label per example");
      names.insert(e.labels.begin(), e.labels.end());
    }
  ProbeData d;
  d.label_names.assign(names.begin(), names.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < d.label_names.size(); ++i) index[d.label_names[i]] = static_cast<int>(i);
  auto fill = [&](ProbeSplit& s, const nn::Matrix<double>& x, std::span<const EditExample> ex) {
    if (x.rows() != static_cast<Eigen::Index>(ex.size()))
      throw DimensionError("probe: representation rows do not match examples");
    s.x = x;
    for (const EditExample& e : ex) {
      std::vector<int> ids;
      for (const std::string& l : e.labels) ids.push_back(index.at(l));
      std::sort(ids.begin(), ids.end());
      s.labels.push_back(std::move(ids));
    }
  };
  fill(d.train, train_x, train);
  fill(d.valid, valid_x, valid);
  fill(d.test, test_x, test);
  return d;
}

nlohmann::json ProbeResult::to_json() const {
  nlohmann::json j = {{"depth", depth},
                      {"accuracy", {{"train", train_accuracy}, {"valid", valid_accuracy}, {"test", test_accuracy}}},
                      {"best_epoch", best_epoch},
                      {"epochs_run", epochs_run}};
  if (!label_f1.empty()) j["label_f1"] = label_f1;
  return j;
}

namespace {

class Mlp {
 public:
  Mlp(int in, int hidden, int depth, int out, Rng& rng) {
    int width = in;
    for (int i = 0; i < depth; ++i) {
      layers_.emplace_back(store_, "probe.hidden" + std::to_string(i), width, hidden, rng);
      width = hidden;
    }
    layers_.emplace_back(store_, "probe.out", width, out, rng);
  }

  nn::Var<double> forward(nn::Graph<double>& g, const nn::Matrix<double>& x) const {
    nn::Var<double> h = g.constant(x);
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = nn::relu(layers_[i](g, h));
    return layers_.back()(g, h);
  }

  nn::ParameterStore<double>& store() { return store_; }

 private:
  nn::ParameterStore<double> store_;
  std::vector<nn::Linear<double>> layers_;
};

struct Standardizer {
  Eigen::RowVectorXd mean, scale;

  explicit Standardizer(const nn::Matrix<double>& x) {
    mean = x.colwise().mean();
    scale = Eigen::RowVectorXd::Ones(x.cols());
    if (x.rows() > 1)
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double sd = std::sqrt((x.col(c).array() - mean(c)).square().sum() /
                                    static_cast<double>(x.rows() - 1));
        if (sd > 1e-12) scale(c) = 1.0 / sd;
      }
  }
  nn::Matrix<double> apply(const nn::Matrix<double>& x) const {
    return ((x.rowwise() - mean).array().rowwise() * scale.array()).matrix();
  }
};

bool row_correct(const nn::Matrix<double>& logits, Eigen::Index r, const std::vector<int>& labels,
                 ProbeMode mode) {
  if (mode == ProbeMode::Multiclass) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    return static_cast<int>(best) == labels.front();
  }
  std::vector<int> predicted;
  for (Eigen::Index c = 0; c < logits.cols(); ++c)
    if (logits(r, c) > 0.0) predicted.push_back(static_cast<int>(c));
  return predicted == labels;
}

nn::Matrix<double> predict(const Mlp& mlp, const nn::Matrix<double>& x) {
  nn::Graph<double> g(false);
  return mlp.forward(g, x).value();
}

double accuracy(const nn::Matrix<double>& logits, const ProbeSplit& s, ProbeMode mode) {
  if (s.labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) hits += row_correct(logits, r, s.labels[r], mode);
  return static_cast<double>(hits) / static_cast<double>(s.labels.size());
}

}  // namespace

ProbeResult train_probe(const ProbeData& data, const ProbeConfig& config) {
  config.validate();
  const auto classes = static_cast<int>(data.label_names.size());
  if (classes < 2) throw LabelError("single-class labels: probing needs at least two classes");
  if (data.train.x.rows() == 0) throw Error("probe: empty training split");
  const Standardizer norm(data.train.x);
  const nn::Matrix<double> xtr = norm.apply(data.train.x), xva = norm.apply(data.valid.x),
                           xte = norm.apply(data.test.x);

  const Rng root(config.seed);
  Rng init = root.derive("probe/init", static_cast<std::uint64_t>(config.depth));
  Mlp mlp(static_cast<int>(xtr.cols()), config.hidden, config.depth, classes, init);
  nn::AdamConfig ac;
  ac.lr = config.lr;
  nn::Adam<double> adam(ac);
  const auto params = mlp.store().parameters();

  std::vector<nn::Matrix<double>> best_values;
  double best_valid = -1.0;
  ProbeResult result;
  result.depth = config.depth;
  int since_best = 0;
  std::vector<std::size_t> order(static_cast<std::size_t>(xtr.rows()));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = root.derive("probe/shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle.engine());
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      nn::Matrix<double> xb(static_cast<Eigen::Index>(n), xtr.cols());
      nn::Matrix<double> yb = nn::Matrix<double>::Zero(static_cast<Eigen::Index>(n), classes);
      std::vector<nn::SparseTarget> targets;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = order[start + i];
        xb.row(static_cast<Eigen::Index>(i)) = xtr.row(static_cast<Eigen::Index>(row));
        for (int l : data.train.labels[row]) {
          yb(static_cast<Eigen::Index>(i), l) = 1.0;
          targets.push_back({static_cast<Eigen::Index>(i), l, 1.0});
        }
      }
      mlp.store().zero_grad();
      nn::Graph<double> g;
      const nn::Var<double> logits = mlp.forward(g, xb);
      const nn::Var<double> loss =
          config.mode == ProbeMode::Multiclass
              ? nn::softmax_cross_entropy<double>(logits, targets)
              : nn::sigmoid_cross_entropy<double>(logits, yb);
      g.backward(nn::scale(loss, 1.0 / static_cast<double>(n)));
      adam.step(params);
    }
    ++result.epochs_run;
    const double va = accuracy(predict(mlp, xva), data.valid, config.mode);
    if (va > best_valid) {
      best_valid = va;
      result.best_epoch = epoch + 1;
      since_best = 0;
      best_values.clear();
      for (const nn::Parameter<double>* p : params) best_values.push_back(p->value);
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];

  result.train_accuracy = accuracy(predict(mlp, xtr), data.train, config.mode);
  result.valid_accuracy = accuracy(predict(mlp, xva), data.valid, config.mode);
  const nn::Matrix<double> test_logits = predict(mlp, xte);
  result.test_accuracy = accuracy(test_logits, data.test, config.mode);
  if (config.mode == ProbeMode::Multilabel) {
    for (int c = 0; c < classes; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (Eigen::Index r = 0; r < test_logits.rows(); ++r) {
        const auto& ls = data.test.labels[static_cast<std::size_t>(r)];
        const bool truth = std::binary_search(ls.begin(), ls.end(), c);
        const bool pred = test_logits(r, c) > 0.0;
        tp += truth && pred;
        fp += !truth && pred;
        fn += truth && !pred;
      }
      result.label_f1.push_back(tp + fp + fn == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn));
    }
  }
  return result;
}

nlohmann::json DepthSweep::to_json() const {
  nlohmann::json curve = nlohmann::json::array(), per = nlohmann::json::array();
  for (const ProbeResult& r : results) {
    curve.push_back({{"depth", r.depth}, {"test_accuracy", r.test_accuracy}});
    per.push_back(r.to_json());
  }
  return {{"mode", std::string(probe_mode_name(mode))},
          {"labels", label_names},
          {"curve", curve},
          {"results", per}};
}

DepthSweep depth_sweep(const ProbeData& data, std::span<const int> depths, const ProbeConfig& config) {
  if (depths.empty()) throw Error("depth sweep needs at least one depth");
  DepthSweep sweep;
  sweep.label_names = data.label_names;
  sweep.mode = config.mode;
  for (int d : depths) {
    ProbeConfig c = config;
    c.depth = d;
    sweep.results.push_back(train_probe(data, c));
  }
  return sweep;
}

std::string render_depth_svg(const DepthSweep& sweep, std::string_view title) {
  const double w = 480, h = 320, left = 60, right = 20, top = 40, bottom = 50;
  const double pw = w - left - right, ph = h - top - bottom;
  int dmin = 0, dmax = 1;
  if (!sweep.results.empty()) {
    dmin = dmax = sweep.results.front().depth;
    for (const ProbeResult& r : sweep.results) {
      dmin = std::min(dmin, r.depth);
      dmax = std::max(dmax, r.depth);
    }
  }
  const double span = dmax > dmin ? dmax - dmin : 1.0;
  auto px = [&](double d) { return left + (dmax > dmin ? (d - dmin) / span * pw : pw / 2); };
  auto py = [&](double a) { return top + (1.0 - a) * ph; };

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">" << title << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
    << top + ph << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double a = i / 5.0;
    s << "<text x=\"" << left - 8 << "\" y=\"" << py(a) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << a << "</text>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << py(a) << "\" x2=\"" << left + pw << "\" y2=\""
      << py(a) << "\" stroke=\"#ddd\"/>\n";
  }
  for (const ProbeResult& r : sweep.results)
    s << "<text x=\"" << px(r.depth) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << r.depth
      << "</text>\n";
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">hidden layers</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">test accuracy</text>\n";
  s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const ProbeResult& r : sweep.results) s << px(r.depth) << "," << py(r.test_accuracy) << " ";
  s << "\"/>\n";
  for (const ProbeResult& r : sweep.results)
    s << "<circle cx=\"" << px(r.depth) << "\" cy=\"" << py(r.test_accuracy)
      << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace eve
