#include "hosm/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace hosm {

// Replayable per-thread tape program. Parameter leaves are refreshed once per
// evaluate() call, sample leaves once per anchor; the graph itself is built a
// single time.
struct LossEvaluator::Program {
  Tape tape;
  // sample leaves
  int xt = -1;    // x + sigma z (plain: the noisy point; VR: the + branch)
  int xm = -1;    // x - sigma z (VR)
  int xc = -1;    // clean anchor x (VR)
  int z = -1;     // raw noise (VR control variate)
  int zs = -1;    // z / sigma
  int cmat = -1;  // (I - z z^T) / sigma^2
  int cvec = -1;  // (1 - z o z) / sigma^2
  int c0 = -1;    // per-sample scalar constant of the DSM control variate
  // outputs
  int dsm_node = -1;
  int d2sm_node = -1;
  int total_node = -1;
  // parameter leaves in flat layout order
  std::vector<MlpTapeRef> net_refs;
  // scratch for per-sample leaf values
  Vec buf_xt, buf_xm, buf_zs, buf_cvec;
  Mat buf_cmat;
};

namespace {

void validate(const PairSpec& spec, const ObjectiveSpec& obj) {
  if (obj.sigma <= 0.0) throw std::invalid_argument("objective: sigma must be positive");
  if (obj.gamma < 0.0) throw std::invalid_argument("objective: gamma must be non-negative");
  if (spec.dim < 1) throw std::invalid_argument("objective: dimension must be positive");
  const bool joint = obj.objective != Objective::dsm;
  if (joint && !spec.with_second) throw std::invalid_argument("objective: second-order head required");
  if (obj.objective == Objective::d2sm_joint && spec.mode == SecondOrderMode::diag_only)
    throw std::invalid_argument("objective: diag-only model passed to the full second-order loss");
}

}  // namespace

LossEvaluator::LossEvaluator(const PairSpec& spec, const ObjectiveSpec& objective)
    : spec_(spec), obj_(objective) {
  validate(spec_, obj_);
  build_programs();
}

LossEvaluator::~LossEvaluator() = default;

void LossEvaluator::build_programs() {
  const int n_threads = max_threads();
  programs_.clear();
  for (int tview = 0; tview < n_threads; ++tview) {
    auto p = std::make_unique<Program>();
    Tape& t = p->tape;
    const int D = spec_.dim;
    const bool joint = obj_.objective != Objective::dsm;
    const bool diag = obj_.objective == Objective::d2sm_joint_diag;
    const bool vr = obj_.variance_reduction;
    const bool model_full = spec_.mode == SecondOrderMode::full;
    const int rank = spec_.effective_rank();

    p->xt = t.leaf(D, 1, false);
    if (vr) {
      if (joint) p->xm = t.leaf(D, 1, false);
      p->xc = t.leaf(D, 1, false);
      p->z = t.leaf(D, 1, false);
      p->c0 = t.leaf(1, 1, false);
    }
    p->zs = t.leaf(D, 1, false);
    if (joint && !diag) p->cmat = t.leaf(D, D, false);
    if (joint && diag) p->cvec = t.leaf(D, 1, false);

    const auto s1d = spec_.s1_dims();
    MlpTapeRef s1ref = build_mlp_tape(t, s1d, p->xt);
    const int s1_p = s1ref.out;
    int s1_m = -1, s1_c = -1;
    if (vr) {
      if (joint) s1_m = replay_mlp_tape(t, s1ref, s1d, p->xm);
      s1_c = replay_mlp_tape(t, s1ref, s1d, p->xc);
    }
    p->net_refs.push_back(s1ref);

    // first-order term: 1/2 || s1(x~) + z/sigma ||^2, minus the control
    // variate (1/sigma) s1(x)^T z and its compensating constant when VR is on
    int r1 = t.add(s1_p, p->zs);
    int dsm = t.scale(t.sum(t.hadamard(r1, r1)), 0.5);
    if (vr) {
      int cv = t.scale(t.sum(t.hadamard(s1_c, p->z)), 1.0 / obj_.sigma);
      dsm = t.add(t.sub(dsm, cv), p->c0);
    }
    p->dsm_node = dsm;

    if (!joint) {
      p->total_node = dsm;
      programs_.push_back(std::move(p));
      continue;
    }

    const auto ad = spec_.alpha_dims();
    MlpTapeRef aref = build_mlp_tape(t, ad, p->xt);
    const int a_p = aref.out;
    MlpTapeRef bref;
    int b_p = -1;
    std::vector<int> bd;
    if (model_full) {
      bd = spec_.beta_dims();
      bref = build_mlp_tape(t, bd, p->xt);
      b_p = bref.out;
    }

    auto psi_full_at = [&](int a_out, int b_out, int s1_out) {
      int beta = t.reshape(b_out, D, rank);
      int s2 = t.add(t.diag_embed(a_out), t.matmul(beta, t.transpose(beta)));
      return t.add(s2, t.matmul(s1_out, t.transpose(s1_out)));
    };
    auto psi_diag_at = [&](int a_out, int b_out, int s1_out) {
      int s2d = a_out;
      if (model_full) {
        int beta = t.reshape(b_out, D, rank);
        s2d = t.add(a_out, t.rowsum(t.hadamard(beta, beta)));
      }
      return t.add(s2d, t.hadamard(s1_out, s1_out));
    };

    int d2 = -1;
    if (!vr) {
      if (diag) {
        int r2 = t.add(psi_diag_at(a_p, b_p, s1_p), p->cvec);
        d2 = t.sum(t.hadamard(r2, r2));
      } else {
        int R = t.add(psi_full_at(a_p, b_p, s1_p), p->cmat);
        d2 = t.sum(t.hadamard(R, R));
      }
    } else {
      int a_m = replay_mlp_tape(t, aref, ad, p->xm);
      int a_c = replay_mlp_tape(t, aref, ad, p->xc);
      int b_m = -1, b_c = -1;
      if (model_full) {
        b_m = replay_mlp_tape(t, bref, bd, p->xm);
        b_c = replay_mlp_tape(t, bref, bd, p->xc);
      }
      int psi_p, psi_m, psi_c, cnode;
      if (diag) {
        psi_p = psi_diag_at(a_p, b_p, s1_p);
        psi_m = psi_diag_at(a_m, b_m, s1_m);
        psi_c = psi_diag_at(a_c, b_c, s1_c);
        cnode = p->cvec;
      } else {
        psi_p = psi_full_at(a_p, b_p, s1_p);
        psi_m = psi_full_at(a_m, b_m, s1_m);
        psi_c = psi_full_at(a_c, b_c, s1_c);
        cnode = p->cmat;
      }
      // antithetic estimator: psi(+)^2 + psi(-)^2 + 2 C o (psi(+) + psi(-) - 2 psi(x)),
      // equal in expectation to twice the plain loss minus its theta-free constant
      int corr = t.sub(t.add(psi_p, psi_m), t.scale(psi_c, 2.0));
      int sq = t.add(t.sum(t.hadamard(psi_p, psi_p)), t.sum(t.hadamard(psi_m, psi_m)));
      d2 = t.add(sq, t.scale(t.sum(t.hadamard(cnode, corr)), 2.0));
    }
    p->d2sm_node = d2;
    p->total_node = t.add(d2, t.scale(dsm, obj_.gamma));

    p->net_refs.push_back(aref);
    if (model_full) p->net_refs.push_back(bref);
    programs_.push_back(std::move(p));
  }
}

LossTerms LossEvaluator::evaluate(const Vec& theta, const std::vector<BatchSample>& batch, Vec* grad, Exec exec) {
  const std::size_t P = spec_.param_total();
  if (theta.size() != P) throw std::invalid_argument("evaluate: theta size mismatch");
  const int N = static_cast<int>(batch.size());
  if (N == 0) throw std::invalid_argument("evaluate: empty batch");
  const int D = spec_.dim;
  for (const BatchSample& s : batch)
    if (static_cast<int>(s.x.size()) != D || static_cast<int>(s.z.size()) != D)
      throw std::invalid_argument("evaluate: sample dimension mismatch");

  // refresh parameter leaves on every per-thread program
  for (auto& p : programs_) {
    const double* src = theta.data();
    for (const MlpTapeRef& ref : p->net_refs) {
      set_mlp_leaves(p->tape, ref, src);
      std::size_t n = 0;
      for (int id : ref.w_ids) n += p->tape.node(id).val.size();
      for (int id : ref.b_ids) n += p->tape.node(id).val.size();
      src += n;
    }
  }

  const bool want_grad = grad != nullptr;
  // Fixed reduction layout regardless of thread count: samples are grouped in
  // chunks of kChunk; leaf adjoints accumulate per chunk inside the tape, and
  // chunk sums are combined in chunk order. Serial and parallel runs share
  // this layout and agree bit for bit.
  constexpr int kChunk = 16;
  const int n_chunks = (N + kChunk - 1) / kChunk;
  if (want_grad) grad_slots_.assign(static_cast<std::size_t>(n_chunks) * P, 0.0);
  term_slots_.assign(static_cast<std::size_t>(N) * 3, 0.0);

  const double sig = obj_.sigma;
  const bool joint = obj_.objective != Objective::dsm;
  const bool diag = obj_.objective == Objective::d2sm_joint_diag;
  const bool vr = obj_.variance_reduction;

  parallel_for(exec, n_chunks, [&](int chunk) {
    Program& p = *programs_[static_cast<std::size_t>(thread_index())];
    Tape& t = p.tape;
    const int begin = chunk * kChunk;
    const int end = std::min(N, begin + kChunk);
    for (int i = begin; i < end; ++i) {
      const BatchSample& s = batch[static_cast<std::size_t>(i)];
      p.buf_xt.resize(s.x.size());
      p.buf_zs.resize(s.x.size());
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        p.buf_xt[k] = s.x[k] + sig * s.z[k];
        p.buf_zs[k] = s.z[k] / sig;
      }
      t.set_leaf(p.xt, p.buf_xt);
      t.set_leaf(p.zs, p.buf_zs);
      if (vr) {
        p.buf_xm.resize(s.x.size());
        for (std::size_t k = 0; k < s.x.size(); ++k) p.buf_xm[k] = s.x[k] - sig * s.z[k];
        if (p.xm >= 0) t.set_leaf(p.xm, p.buf_xm);
        t.set_leaf(p.xc, s.x);
        t.set_leaf(p.z, s.z);
        double z2 = 0.0;
        for (double v : s.z) z2 += v * v;
        const double c0 = (-0.5 * z2 + 0.5 * static_cast<double>(D)) / (sig * sig);
        t.set_leaf(p.c0, std::span<const double>(&c0, 1));
      }
      if (joint && !diag) {
        if (p.buf_cmat.rows != D) p.buf_cmat = Mat(D, D);
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b)
            p.buf_cmat(a, b) =
                ((a == b ? 1.0 : 0.0) - s.z[static_cast<std::size_t>(a)] * s.z[static_cast<std::size_t>(b)]) /
                (sig * sig);
        t.set_leaf(p.cmat, p.buf_cmat);
      }
      if (joint && diag) {
        p.buf_cvec.resize(s.x.size());
        for (std::size_t k = 0; k < s.x.size(); ++k) p.buf_cvec[k] = (1.0 - s.z[k] * s.z[k]) / (sig * sig);
        t.set_leaf(p.cvec, p.buf_cvec);
      }

      t.forward();
      term_slots_[static_cast<std::size_t>(i) * 3 + 0] = t.scalar(p.total_node);
      term_slots_[static_cast<std::size_t>(i) * 3 + 1] = t.scalar(p.dsm_node);
      term_slots_[static_cast<std::size_t>(i) * 3 + 2] = joint ? t.scalar(p.d2sm_node) : 0.0;

      if (want_grad) t.backward(p.total_node, /*zero_leaf_adjoints=*/i == begin);
    }
    if (want_grad) {
      double* slot = &grad_slots_[static_cast<std::size_t>(chunk) * P];
      std::size_t off = 0;
      for (const MlpTapeRef& ref : p.net_refs) off += collect_mlp_grads(t, ref, slot + off);
      // parameters untouched by this objective (second-order head under a
      // dsm-only objective) keep their zero slots
    }
  });

  LossTerms out;
  for (int i = 0; i < N; ++i) {
    out.total += term_slots_[static_cast<std::size_t>(i) * 3 + 0];
    out.dsm += term_slots_[static_cast<std::size_t>(i) * 3 + 1];
    out.d2sm += term_slots_[static_cast<std::size_t>(i) * 3 + 2];
  }
  out.total /= N;
  out.dsm /= N;
  out.d2sm /= N;

  if (want_grad) {
    grad->assign(P, 0.0);
    Vec& g = *grad;
    const double inv_n = 1.0 / static_cast<double>(N);
    parallel_for(exec, static_cast<int>(P), [&](int pi) {
      double s = 0.0;
      for (int c = 0; c < n_chunks; ++c) s += grad_slots_[static_cast<std::size_t>(c) * P + static_cast<std::size_t>(pi)];
      g[static_cast<std::size_t>(pi)] = s * inv_n;
    });
  }
  return out;
}

namespace {
LossTerms run_once(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, const ObjectiveSpec& os,
                   Vec* grad, Exec exec) {
  LossEvaluator ev(pair.spec, os);
  return ev.evaluate(flatten_params(pair), batch, grad, exec);
}
}  // namespace

LossTerms loss_dsm(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma, Vec* grad,
                   Exec exec) {
  return run_once(pair, batch, {Objective::dsm, sigma, 0.0, false}, grad, exec);
}

LossTerms loss_dsm_vr(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma, Vec* grad,
                      Exec exec) {
  return run_once(pair, batch, {Objective::dsm, sigma, 0.0, true}, grad, exec);
}

LossTerms loss_d2sm(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma, Vec* grad,
                    Exec exec) {
  return run_once(pair, batch, {Objective::d2sm_joint, sigma, 0.0, false}, grad, exec);
}

LossTerms loss_d2sm_diag(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma, Vec* grad,
                         Exec exec) {
  return run_once(pair, batch, {Objective::d2sm_joint_diag, sigma, 0.0, false}, grad, exec);
}

LossTerms loss_d2sm_vr(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma, Vec* grad,
                       Exec exec) {
  return run_once(pair, batch, {Objective::d2sm_joint, sigma, 0.0, true}, grad, exec);
}

LossTerms loss_joint(const ScoreModelPair& pair, const std::vector<BatchSample>& batch, double sigma, double gamma,
                     bool diag, bool vr, Vec* grad, Exec exec) {
  const Objective obj = diag ? Objective::d2sm_joint_diag : Objective::d2sm_joint;
  return run_once(pair, batch, {obj, sigma, gamma, vr}, grad, exec);
}

}  // namespace hosm
