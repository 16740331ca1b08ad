#include "drowsy/lstm.hpp"

#include <cmath>
#include <string>

#include "drowsy/error.hpp"

namespace drowsy {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LstmLayerParams LstmLayerParams::zeros(Index input_size, Index hidden_size) {
  return {MatrixXd::Zero(4 * hidden_size, input_size),
          MatrixXd::Zero(4 * hidden_size, hidden_size), VectorXd::Zero(4 * hidden_size)};
}

void LstmLayerParams::check_shape(Index input_size) const {
  const Index h = U.cols();
  if (h < 1 || U.rows() != 4 * h || W.rows() != 4 * h || b.size() != 4 * h ||
      W.cols() != input_size) {
    throw Error(ErrorKind::ShapeMismatch,
                "LSTM layer shape W " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) +
                    ", U " + std::to_string(U.rows()) + "x" + std::to_string(U.cols()) +
                    ", b " + std::to_string(b.size()) + " inconsistent with input size " +
                    std::to_string(input_size));
  }
}

AutoencoderParams AutoencoderParams::zeros(Index feature_dim, Index hidden_size) {
  AutoencoderParams p;
  p.encoder[0] = LstmLayerParams::zeros(feature_dim, hidden_size);
  p.encoder[1] = LstmLayerParams::zeros(hidden_size, hidden_size);
  p.decoder[0] = LstmLayerParams::zeros(hidden_size, hidden_size);
  p.decoder[1] = LstmLayerParams::zeros(hidden_size, hidden_size);
  p.out_weight = MatrixXd::Zero(feature_dim, hidden_size);
  p.out_bias = VectorXd::Zero(feature_dim);
  return p;
}

void AutoencoderParams::check_shape() const {
  const Index d = feature_dim();
  const Index h = hidden_size();
  if (d < 1 || h < 1 || out_bias.size() != d) {
    throw Error(ErrorKind::ShapeMismatch, "output projection shape is inconsistent");
  }
  encoder[0].check_shape(d);
  encoder[1].check_shape(h);
  decoder[0].check_shape(h);
  decoder[1].check_shape(h);
  for (const auto* layer : {&encoder[0], &encoder[1], &decoder[0], &decoder[1]}) {
    if (layer->hidden_size() != h) {
      throw Error(ErrorKind::ShapeMismatch, "all LSTM layers must share the hidden size");
    }
  }
}

std::size_t AutoencoderParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&n](std::string_view, const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool operator==(const AutoencoderParams& a, const AutoencoderParams& b) {
  bool same = true;
  std::vector<Eigen::Map<const MatrixXd>> lhs;
  a.for_each_tensor([&](std::string_view, Eigen::Map<const MatrixXd> m) { lhs.push_back(m); });
  std::size_t k = 0;
  b.for_each_tensor([&](std::string_view, Eigen::Map<const MatrixXd> m) {
    const auto& other = lhs[k++];
    if (other.rows() != m.rows() || other.cols() != m.cols() || other != m) same = false;
  });
  return same;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one layer over T steps, one column per step.
struct LayerTrace {
  MatrixXd input;   // D_in x T
  MatrixXd i, f, g, o;
  MatrixXd c;       // c(t)
  MatrixXd tanh_c;
  MatrixXd h;       // h(t)
};

LayerTrace run_layer(const LstmLayerParams& p, const MatrixXd& input) {
  const Index h_size = p.hidden_size();
  const Index steps = input.cols();
  LayerTrace tr;
  tr.input = input;
  for (auto* m : {&tr.i, &tr.f, &tr.g, &tr.o, &tr.c, &tr.tanh_c, &tr.h}) {
    m->resize(h_size, steps);
  }
  // Input contributions for every step at once.
  const MatrixXd x_proj = (p.W * input).colwise() + p.b;
  VectorXd h = VectorXd::Zero(h_size);
  VectorXd c = VectorXd::Zero(h_size);
  for (Index t = 0; t < steps; ++t) {
    const VectorXd a = x_proj.col(t) + p.U * h;
    tr.i.col(t) = a.segment(0, h_size).unaryExpr(&sigmoid);
    tr.f.col(t) = a.segment(h_size, h_size).unaryExpr(&sigmoid);
    tr.g.col(t) = a.segment(2 * h_size, h_size).array().tanh();
    tr.o.col(t) = a.segment(3 * h_size, h_size).unaryExpr(&sigmoid);
    c = tr.f.col(t).cwiseProduct(c) + tr.i.col(t).cwiseProduct(tr.g.col(t));
    tr.c.col(t) = c;
    tr.tanh_c.col(t) = c.array().tanh();
    h = tr.o.col(t).cwiseProduct(tr.tanh_c.col(t));
    tr.h.col(t) = h;
  }
  return tr;
}

// Backpropagates dL/dh(t) (one column per step, external to the recurrence)
// through one layer. Accumulates parameter gradients into `grad` and returns
// dL/dinput, one column per step.
MatrixXd backprop_layer(const LstmLayerParams& p, const LayerTrace& tr, const MatrixXd& dh_ext,
                        LstmLayerParams& grad) {
  const Index h_size = p.hidden_size();
  const Index steps = tr.input.cols();
  MatrixXd d_pre(4 * h_size, steps);
  VectorXd dh_next = VectorXd::Zero(h_size);
  VectorXd dc_next = VectorXd::Zero(h_size);
  for (Index t = steps - 1; t >= 0; --t) {
    const VectorXd dh = dh_ext.col(t) + dh_next;
    const auto o = tr.o.col(t).array();
    const auto i = tr.i.col(t).array();
    const auto f = tr.f.col(t).array();
    const auto g = tr.g.col(t).array();
    const auto tc = tr.tanh_c.col(t).array();
    const VectorXd c_prev = t > 0 ? VectorXd(tr.c.col(t - 1)) : VectorXd::Zero(h_size);

    const VectorXd dc = (dc_next.array() + dh.array() * o * (1.0 - tc * tc)).matrix();
    auto da = d_pre.col(t);
    da.segment(0, h_size) = (dc.array() * g * i * (1.0 - i)).matrix();
    da.segment(h_size, h_size) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
    da.segment(2 * h_size, h_size) = (dc.array() * i * (1.0 - g * g)).matrix();
    da.segment(3 * h_size, h_size) = (dh.array() * tc * o * (1.0 - o)).matrix();

    dc_next = (dc.array() * f).matrix();
    dh_next = p.U.transpose() * da;
  }
  grad.W.noalias() += d_pre * tr.input.transpose();
  if (steps > 1) {
    grad.U.noalias() += d_pre.rightCols(steps - 1) * tr.h.leftCols(steps - 1).transpose();
  }
  grad.b += d_pre.rowwise().sum();
  return p.W.transpose() * d_pre;
}

struct ForwardTrace {
  std::array<LayerTrace, 2> encoder;
  std::array<LayerTrace, 2> decoder;
  VectorXd context;
  MatrixXd emissions;  // N x D
};

ForwardTrace forward(const FeatureSequence& seq, const AutoencoderParams& params) {
  params.check_shape();
  if (seq.rows() < 1) throw Error(ErrorKind::ShapeMismatch, "clip has no frames");
  if (seq.cols() != params.feature_dim()) {
    throw Error(ErrorKind::ShapeMismatch,
                "clip feature dim " + std::to_string(seq.cols()) + " != model feature dim " +
                    std::to_string(params.feature_dim()));
  }
  const Index n = seq.rows();
  ForwardTrace tr;
  tr.encoder[0] = run_layer(params.encoder[0], seq.transpose());
  tr.encoder[1] = run_layer(params.encoder[1], tr.encoder[0].h);
  tr.context = tr.encoder[1].h.col(n - 1);
  tr.decoder[0] = run_layer(params.decoder[0], tr.context.replicate(1, n));
  tr.decoder[1] = run_layer(params.decoder[1], tr.decoder[0].h);
  tr.emissions = ((params.out_weight * tr.decoder[1].h).colwise() + params.out_bias).transpose();
  return tr;
}

}  // namespace

CellState lstm_cell_step(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& h,
                         const Eigen::Ref<const VectorXd>& c, const LstmLayerParams& p) {
  p.check_shape(x.size());
  const Index h_size = p.hidden_size();
  if (h.size() != h_size || c.size() != h_size) {
    throw Error(ErrorKind::ShapeMismatch, "state size does not match hidden size");
  }
  const VectorXd a = p.W * x + p.U * h + p.b;
  const VectorXd i = a.segment(0, h_size).unaryExpr(&sigmoid);
  const VectorXd f = a.segment(h_size, h_size).unaryExpr(&sigmoid);
  const VectorXd g = a.segment(2 * h_size, h_size).array().tanh();
  const VectorXd o = a.segment(3 * h_size, h_size).unaryExpr(&sigmoid);
  CellState next;
  next.c = f.cwiseProduct(c) + i.cwiseProduct(g);
  next.h = o.cwiseProduct(VectorXd(next.c.array().tanh()));
  return next;
}

VectorXd encode(const FeatureSequence& seq, const AutoencoderParams& params) {
  params.check_shape();
  if (seq.rows() < 1) throw Error(ErrorKind::ShapeMismatch, "clip has no frames");
  if (seq.cols() != params.feature_dim()) {
    throw Error(ErrorKind::ShapeMismatch, "clip feature dim does not match model");
  }
  const LayerTrace l1 = run_layer(params.encoder[0], seq.transpose());
  const LayerTrace l2 = run_layer(params.encoder[1], l1.h);
  return l2.h.col(seq.rows() - 1);
}

MatrixXd decode(const Eigen::Ref<const VectorXd>& context, Index length,
                const AutoencoderParams& params) {
  params.check_shape();
  if (length < 1) throw Error(ErrorKind::ShapeMismatch, "decode length must be >= 1");
  if (context.size() != params.hidden_size()) {
    throw Error(ErrorKind::ShapeMismatch, "context size does not match hidden size");
  }
  const LayerTrace l1 = run_layer(params.decoder[0], context.replicate(1, length));
  const LayerTrace l2 = run_layer(params.decoder[1], l1.h);
  return ((params.out_weight * l2.h).colwise() + params.out_bias).transpose();
}

double clip_loss(const FeatureSequence& features, const MatrixXd& emissions) {
  if (features.rows() != emissions.rows() || features.cols() != emissions.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "reconstruction shape differs from clip shape");
  }
  return (features - emissions.colwise().reverse()).squaredNorm();
}

MatrixXd reconstruct(const FeatureSequence& seq, const AutoencoderParams& params) {
  return forward(seq, params).emissions;
}

double anomaly_score(const FeatureSequence& seq, const AutoencoderParams& params) {
  const MatrixXd emissions = reconstruct(seq, params);
  return clip_loss(seq, emissions) / static_cast<double>(seq.rows() * seq.cols());
}

LossAndGradient backward(const FeatureSequence& seq, const AutoencoderParams& params) {
  const ForwardTrace tr = forward(seq, params);
  const Index n = seq.rows();
  const Index h_size = params.hidden_size();

  LossAndGradient out;
  out.grad = AutoencoderParams::zeros(params.feature_dim(), h_size);
  // Emission at step t is compared with frame N-1-t.
  const MatrixXd residual = tr.emissions - seq.colwise().reverse();
  out.loss = residual.squaredNorm();
  const MatrixXd d_emit = 2.0 * residual.transpose();  // D x N

  out.grad.out_weight.noalias() = d_emit * tr.decoder[1].h.transpose();
  out.grad.out_bias = d_emit.rowwise().sum();
  const MatrixXd dh_dec2 = params.out_weight.transpose() * d_emit;

  const MatrixXd dh_dec1 = backprop_layer(params.decoder[1], tr.decoder[1], dh_dec2, out.grad.decoder[1]);
  const MatrixXd d_context_steps =
      backprop_layer(params.decoder[0], tr.decoder[0], dh_dec1, out.grad.decoder[0]);

  // The context fans out to every decoder step; its gradient is the sum.
  MatrixXd dh_enc2 = MatrixXd::Zero(h_size, n);
  dh_enc2.col(n - 1) = d_context_steps.rowwise().sum();
  const MatrixXd dh_enc1 = backprop_layer(params.encoder[1], tr.encoder[1], dh_enc2, out.grad.encoder[1]);
  backprop_layer(params.encoder[0], tr.encoder[0], dh_enc1, out.grad.encoder[0]);
  return out;
}

}  // namespace drowsy
