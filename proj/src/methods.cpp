#include "dpep/methods.hpp"

#include <algorithm>

namespace dpep {

namespace {

std::size_t eval_index(const ProblemContext& ctx) {
  return ctx.evals.evals().size() - 1;
}

}  // namespace

MethodTrace build_dgd(ProblemContext& ctx, const MethodParams& params,
                      const PointExpr& x0) {
  params.validate();
  MethodTrace trace;
  trace.iterates.push_back(x0);

  // The shared class (constant-matrix mode) is created lazily so a K = 0
  // trace registers no matrix class at all.
  MatrixClassId shared_id = -1;
  auto fresh_class = [&] {
    if (params.matrix_mode == MatrixMode::Constant && shared_id >= 0)
      return shared_id;
    const MatrixClassId id = ctx.consensus.new_class();
    trace.consensus_ids.push_back(id);
    if (params.matrix_mode == MatrixMode::Constant) shared_id = id;
    return id;
  };

  for (int k = 0; k < params.K; ++k) {
    const MatrixClassId id = fresh_class();
    const PointExpr& xk = trace.iterates.back();
    const PointExpr y = consensus_step(ctx.layout, ctx.consensus, xk, id);
    const Evaluation& ev =
        ctx.evals.add_evaluation(ctx.layout, xk, "x" + std::to_string(k));
    trace.eval_indices.push_back(eval_index(ctx));
    trace.iterates.push_back(combine({{1.0, y}, {-params.alpha, ev.grad}}));
  }
  return trace;
}

MethodTrace build_diging(ProblemContext& ctx, const MethodParams& params,
                         const PointExpr& x0) {
  params.validate();
  MethodTrace trace;
  trace.iterates.push_back(x0);

  MatrixClassId shared_id = -1;
  auto fresh_class = [&] {
    if (params.matrix_mode == MatrixMode::Constant && shared_id >= 0)
      return shared_id;
    const MatrixClassId id = ctx.consensus.new_class();
    trace.consensus_ids.push_back(id);
    if (params.matrix_mode == MatrixMode::Constant) shared_id = id;
    return id;
  };

  const Evaluation& ev0 = ctx.evals.add_evaluation(ctx.layout, x0, "x0");
  trace.eval_indices.push_back(eval_index(ctx));
  PointExpr s = ev0.grad;  // gradient tracking initialization s^0 = g^0
  PointExpr g_prev = ev0.grad;

  for (int k = 0; k < params.K; ++k) {
    const MatrixClassId id = fresh_class();
    const PointExpr& xk = trace.iterates.back();
    const PointExpr x_next =
        combine({{1.0, consensus_step(ctx.layout, ctx.consensus, xk, id)},
                 {-params.alpha, s}});
    trace.iterates.push_back(x_next);

    const MatrixClassId id_s =
        params.matrix_mode == MatrixMode::TimeVarying &&
                !params.share_matrix_per_iteration
            ? fresh_class()
            : id;
    const Evaluation& ev = ctx.evals.add_evaluation(
        ctx.layout, x_next, "x" + std::to_string(k + 1));
    trace.eval_indices.push_back(eval_index(ctx));
    s = combine({{1.0, consensus_step(ctx.layout, ctx.consensus, s, id_s)},
                 {1.0, ev.grad},
                 {-1.0, g_prev}});
    g_prev = ev.grad;
  }
  return trace;
}

MethodTrace build_extra(ProblemContext& ctx, const MethodParams& params,
                        const PointExpr& x0) {
  params.validate();
  MethodTrace trace;
  trace.iterates.push_back(x0);

  if (params.K == 0) return trace;

  MatrixClassId shared_id = -1;
  auto next_id = [&] {
    if (params.matrix_mode == MatrixMode::Constant && shared_id >= 0)
      return shared_id;
    const MatrixClassId id = ctx.consensus.new_class();
    trace.consensus_ids.push_back(id);
    if (params.matrix_mode == MatrixMode::Constant) shared_id = id;
    return id;
  };

  const Evaluation& ev0 = ctx.evals.add_evaluation(ctx.layout, x0, "x0");
  trace.eval_indices.push_back(eval_index(ctx));
  PointExpr c_prev = consensus_step(ctx.layout, ctx.consensus, x0, next_id());
  PointExpr g_prev = ev0.grad;
  trace.iterates.push_back(combine({{1.0, c_prev}, {-params.alpha, g_prev}}));

  for (int k = 1; k < params.K; ++k) {
    const PointExpr& xk = trace.iterates.back();
    const PointExpr& xkm1 = trace.iterates[trace.iterates.size() - 2];
    const Evaluation& ev =
        ctx.evals.add_evaluation(ctx.layout, xk, "x" + std::to_string(k));
    trace.eval_indices.push_back(eval_index(ctx));
    const PointExpr ck = consensus_step(ctx.layout, ctx.consensus, xk, next_id());
    // W2 = (I + W)/2: the W2 step reuses the consensus output from step k-1
    // instead of registering a second application.
    trace.iterates.push_back(combine({{1.0, xk},
                                      {1.0, ck},
                                      {-0.5, xkm1},
                                      {-0.5, c_prev},
                                      {-params.alpha, ev.grad},
                                      {params.alpha, g_prev}}));
    c_prev = ck;
    g_prev = ev.grad;
  }
  return trace;
}

MethodTrace build_method(const std::string& name, ProblemContext& ctx,
                         const MethodParams& params, const PointExpr& x0) {
  if (name == "dgd") return build_dgd(ctx, params, x0);
  if (name == "diging") return build_diging(ctx, params, x0);
  if (name == "extra") return build_extra(ctx, params, x0);
  throw Error("unknown method: " + name);
}

bool method_known(const std::string& name) {
  const auto names = method_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> method_names() { return {"dgd", "diging", "extra"}; }

PointExpr averaged_iterate(const MethodTrace& trace) {
  if (trace.iterates.empty()) throw Error("empty trace");
  PointExpr avg;
  const double w = 1.0 / static_cast<double>(trace.iterates.size());
  for (const auto& it : trace.iterates) avg.add_scaled(w, it.par_part());
  return avg;
}

}  // namespace dpep
