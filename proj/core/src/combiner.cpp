#include "modcomb/combiner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace modcomb::combiner {

namespace {

double criterion_value(const IterationRecord& rec,
                       const CombinationConfig& config) {
  return config.criterion == StoppingCriterion::kPredictionError
             ? rec.residual_norm
             : rec.successive_difference;
}

struct Loop {
  const DataSet& data;
  const CombinationConfig& config;
  InnerProductContext ctx;
  double scale;      // ||F||_D
  double threshold;  // absolute stopping threshold
  const MatrixXd* oracle_eval;
  CombinationState state;
  int worse_streak = 0;
  double prev_residual_d = std::numeric_limits<double>::infinity();

  Loop(const DataSet& d, const CombinationConfig& c, const MatrixXd* oracle)
      : data(d), config(c), ctx(d), oracle_eval(oracle) {
    require(config.epsilon > 0, "stopping tolerance must be positive");
    require(config.max_iterations >= 1, "max_iterations must be >= 1");
    scale = ctx.norm(data.targets);
    threshold = config.epsilon_relative ? config.epsilon * scale
                                        : config.epsilon;
  }

  IterationRecord record(int n, const MatrixXd& cur_eval,
                         const MatrixXd* prev_eval, double t_f) {
    IterationRecord rec;
    rec.n = n;
    const MatrixXd resid = data.targets - cur_eval;
    rec.residual_norm = mean_row_norm(resid);
    rec.residual_d_norm = ctx.norm(resid);
    if (prev_eval != nullptr) {
      const MatrixXd diff = cur_eval - *prev_eval;
      rec.successive_difference = mean_row_norm(diff);
      rec.successive_d_norm = ctx.norm(diff);
    }
    rec.t_f = t_f;
    if (oracle_eval != nullptr)
      rec.oracle_distance = ctx.norm(cur_eval - *oracle_eval);

    // Non-decreasing residual beyond the numerical floor is tolerated (the
    // learners may be approximate projections) but flagged.
    const double floor = 1e-13 * std::max(scale, 1.0);
    if (rec.residual_d_norm > floor &&
        rec.residual_d_norm >= prev_residual_d - 1e-10 * scale) {
      if (++worse_streak >= 5) state.stagnation_warning = true;
    } else {
      worse_streak = 0;
    }
    prev_residual_d = rec.residual_d_norm;

    state.history.push_back(rec);
    state.iterations = static_cast<int>(state.history.size());
    return rec;
  }

  bool should_stop(const IterationRecord& rec) {
    const double value = criterion_value(rec, config);
    if (std::isnan(value)) return false;
    if (value < threshold) {
      state.stopped_by_criterion = true;
      return true;
    }
    return false;
  }
};

}  // namespace

double compute_t_f(const MatrixXd& r_prev, const MatrixXd& r_curr,
                   const InnerProductContext& ctx) {
  const MatrixXd delta = r_prev - r_curr;
  const double denom = ctx.inner(delta, delta);
  require(denom > 0.0, "stagnant residual");
  return ctx.inner(r_prev, delta) / denom;
}

CombinationState residual_learning(const DataSet& data, const Learner& first,
                                   const Learner& second) {
  data.validate();
  CombinationConfig config;  // defaults; only used for record bookkeeping
  Loop loop(data, config, nullptr);

  auto model_first = first.fit(data, data.targets);
  const MatrixXd eval_first = model_first->evaluate(data);
  auto model_second = second.fit(data, data.targets - eval_first);
  const MatrixXd cur = eval_first + model_second->evaluate(data);

  loop.record(0, cur, nullptr, std::numeric_limits<double>::quiet_NaN());
  loop.state.model_first = std::move(model_first);
  loop.state.model_second = std::move(model_second);
  return std::move(loop.state);
}

CombinationState iterate(const DataSet& data, const Learner& learner_g,
                         const Learner& learner_h,
                         const CombinationConfig& config,
                         const MatrixXd* oracle_eval) {
  data.validate();
  Loop loop(data, config, oracle_eval);
  const MatrixXd& y = data.targets;

  std::shared_ptr<Model> model_h;
  MatrixXd eval_h;
  if (config.zero_init) {
    eval_h = MatrixXd::Zero(y.rows(), y.cols());
  } else {
    model_h = learner_h.fit(data, y);
    eval_h = model_h->evaluate(data);
  }

  std::shared_ptr<Model> model_g;
  MatrixXd cur, prev;
  for (int n = 0; n < config.max_iterations; ++n) {
    model_g = learner_g.fit(data, y - eval_h);
    const MatrixXd eval_g = model_g->evaluate(data);
    if (config.zero_init && model_h == nullptr) {
      // keep the pair well-defined even before the first H fit
      model_h = learner_h.fit(data, MatrixXd::Zero(y.rows(), y.cols()));
    }
    cur = eval_g + eval_h;
    const IterationRecord rec =
        loop.record(n, cur, n > 0 ? &prev : nullptr,
                    std::numeric_limits<double>::quiet_NaN());
    if (loop.should_stop(rec) || n + 1 == config.max_iterations) break;

    model_h = learner_h.fit(data, y - eval_g);
    eval_h = model_h->evaluate(data);
    prev = cur;
  }

  loop.state.model_first = std::move(model_g);
  loop.state.model_second = std::move(model_h);
  return std::move(loop.state);
}

CombinationState iterate_accelerated(const DataSet& data,
                                     const Learner& learner_g,
                                     const Learner& learner_h,
                                     const CombinationConfig& config,
                                     const MatrixXd* oracle_eval) {
  data.validate();
  Loop loop(data, config, oracle_eval);
  const MatrixXd& y = data.targets;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto model_h = learner_h.fit(data, y);
  MatrixXd eval_h = model_h->evaluate(data);
  auto model_g = learner_g.fit(data, y - eval_h);
  MatrixXd eval_g = model_g->evaluate(data);
  MatrixXd prev = eval_g + eval_h;

  {
    const IterationRecord rec = loop.record(0, prev, nullptr, nan);
    if (loop.should_stop(rec)) {
      loop.state.model_first = std::move(model_g);
      loop.state.model_second = std::move(model_h);
      return std::move(loop.state);
    }
  }

  std::shared_ptr<Model> prev_model_g = model_g;
  std::shared_ptr<Model> prev_model_h = model_h;
  MatrixXd prev_eval_g = eval_g;
  MatrixXd prev_eval_h = eval_h;

  for (int n = 1; n < config.max_iterations; ++n) {
    model_h = learner_h.fit(data, y - prev_eval_g);
    eval_h = model_h->evaluate(data);
    model_g = learner_g.fit(data, y - eval_h);
    eval_g = model_g->evaluate(data);
    MatrixXd cur = eval_g + eval_h;

    // Relax the full combination: the recombined residual is then exactly
    // r_prev + t_F (r_cur - r_prev), whose norm t_F minimizes.
    double t_f = nan;
    const MatrixXd diff = prev - cur;
    const double diff_norm = loop.ctx.norm(diff);
    if (diff_norm > 1e-14 * std::max(loop.scale, 1.0)) {
      t_f = compute_t_f(y - prev, y - cur, loop.ctx);
      model_g = std::static_pointer_cast<Model>(
          model_g->blend(t_f, *prev_model_g, 1.0 - t_f));
      model_h = std::static_pointer_cast<Model>(
          model_h->blend(t_f, *prev_model_h, 1.0 - t_f));
      eval_g = t_f * eval_g + (1.0 - t_f) * prev_eval_g;
      eval_h = t_f * eval_h + (1.0 - t_f) * prev_eval_h;
      cur = eval_g + eval_h;
    }

    const IterationRecord rec = loop.record(n, cur, &prev, t_f);
    prev_model_g = model_g;
    prev_model_h = model_h;
    prev_eval_g = eval_g;
    prev_eval_h = eval_h;
    prev = cur;
    if (loop.should_stop(rec)) break;
  }

  loop.state.model_first = std::move(model_g);
  loop.state.model_second = std::move(model_h);
  return std::move(loop.state);
}

StoppingDecision check_stopping(const CombinationState& state,
                                const DataSet& data,
                                const CombinationConfig& config) {
  require(!state.history.empty(), "no iterations recorded");
  if (config.criterion == StoppingCriterion::kSuccessiveDifference)
    require(state.history.size() >= 2,
            "successive-difference criterion needs a completed iteration");
  InnerProductContext ctx(data);
  const double scale = ctx.norm(data.targets);
  const double threshold =
      config.epsilon_relative ? config.epsilon * scale : config.epsilon;
  const double value = criterion_value(state.last(), config);
  return StoppingDecision{value < threshold, value};
}

void save_history_csv(const CombinationState& state, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open " + path + " for writing");
  out << "n,residual_norm,successive_difference,t_F\n";
  char buf[64];
  for (const auto& rec : state.history) {
    out << rec.n;
    for (double v : {rec.residual_norm, rec.successive_difference, rec.t_f}) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace modcomb::combiner
