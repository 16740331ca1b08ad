#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "drowsy/features.hpp"

namespace drowsy {

/// Gate blocks are stacked in this order inside W, U and b.
enum class Gate : int { Input = 0, Forget = 1, Cell = 2, Output = 3 };

/// One LSTM layer. W is 4H x D_in, U is 4H x H, b is 4H; rows
/// [k*H, (k+1)*H) hold gate k. One bias per gate.
struct LstmLayerParams {
  Eigen::MatrixXd W;
  Eigen::MatrixXd U;
  Eigen::VectorXd b;

  static LstmLayerParams zeros(Eigen::Index input_size, Eigen::Index hidden_size);

  Eigen::Index input_size() const noexcept { return W.cols(); }
  Eigen::Index hidden_size() const noexcept { return U.cols(); }

  auto W_gate(Gate g) { return W.middleRows(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto U_gate(Gate g) { return U.middleRows(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto b_gate(Gate g) { return b.segment(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto W_gate(Gate g) const { return W.middleRows(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto U_gate(Gate g) const { return U.middleRows(static_cast<int>(g) * hidden_size(), hidden_size()); }
  auto b_gate(Gate g) const { return b.segment(static_cast<int>(g) * hidden_size(), hidden_size()); }

  /// Throws ShapeMismatch unless W, U, b agree on H and W has `input_size` cols.
  void check_shape(Eigen::Index input_size) const;
};

/// Two-layer encoder (D->H, H->H), two-layer decoder (H->H, H->H) and the
/// affine output map (D x H, D) applied to decoder layer-2 hidden states.
/// The same struct holds gradients.
struct AutoencoderParams {
  std::array<LstmLayerParams, 2> encoder;
  std::array<LstmLayerParams, 2> decoder;
  Eigen::MatrixXd out_weight;
  Eigen::VectorXd out_bias;

  static AutoencoderParams zeros(Eigen::Index feature_dim, Eigen::Index hidden_size);

  Eigen::Index feature_dim() const noexcept { return out_weight.rows(); }
  Eigen::Index hidden_size() const noexcept { return out_weight.cols(); }

  void check_shape() const;
  std::size_t parameter_count() const;

  /// Calls f(name, Eigen::Map<MatrixXd>) for every tensor in a fixed order.
  template <class F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each_tensor(F&& f) const {
    visit(*this, f);
  }

  friend bool operator==(const AutoencoderParams& a, const AutoencoderParams& b);

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    using MapT = std::conditional_t<std::is_const_v<Self>, Eigen::Map<const Eigen::MatrixXd>,
                                    Eigen::Map<Eigen::MatrixXd>>;
    const auto emit = [&f](const std::string& name, auto& m) {
      f(std::string_view(name), MapT(m.data(), m.rows(), m.cols()));
    };
    for (int stack = 0; stack < 2; ++stack) {
      auto& layers = stack == 0 ? self.encoder : self.decoder;
      const std::string prefix = stack == 0 ? "encoder" : "decoder";
      for (int l = 0; l < 2; ++l) {
        auto& layer = layers[static_cast<std::size_t>(l)];
        const std::string base = prefix + std::to_string(l) + ".";
        emit(base + "W", layer.W);
        emit(base + "U", layer.U);
        emit(base + "b", layer.b);
      }
    }
    emit("out.W", self.out_weight);
    emit("out.b", self.out_bias);
  }
};

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// One LSTM step:
///   i = s(W_i x + U_i h + b_i), f = s(W_f x + U_f h + b_f),
///   g = tanh(W_c x + U_c h + b_c), o = s(W_o x + U_o h + b_o),
///   c' = f*c + i*g, h' = o*tanh(c').
CellState lstm_cell_step(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& h,
                         const Eigen::Ref<const Eigen::VectorXd>& c,
                         const LstmLayerParams& p);

/// Runs both encoder layers over the rows of `seq` from zero states and
/// returns the layer-2 hidden state after the last frame.
Eigen::VectorXd encode(const FeatureSequence& seq, const AutoencoderParams& params);

/// Feeds `context` to the decoder at each of `length` steps from zero states.
/// Row t of the result is the step-t emission W_out h2(t) + b_out, which
/// reconstructs frame length-1-t (the sequence comes out reversed).
Eigen::MatrixXd decode(const Eigen::Ref<const Eigen::VectorXd>& context, Eigen::Index length,
                       const AutoencoderParams& params);

/// sum_t || F(t) - emissions(N-1-t) ||^2 (0-based), i.e. frame t is compared
/// with the emission made at the mirrored step. Not averaged.
double clip_loss(const FeatureSequence& features, const Eigen::MatrixXd& emissions);

/// Emissions for a clip: decode(encode(seq), N).
Eigen::MatrixXd reconstruct(const FeatureSequence& seq, const AutoencoderParams& params);

/// clip_loss / (N * D) for the clip's own reconstruction.
double anomaly_score(const FeatureSequence& seq, const AutoencoderParams& params);

struct LossAndGradient {
  double loss = 0.0;
  AutoencoderParams grad;
};

/// Exact gradient of clip_loss(seq, reconstruct(seq)) with respect to every
/// parameter, by backpropagation through both unrolls.
LossAndGradient backward(const FeatureSequence& seq, const AutoencoderParams& params);

}  // namespace drowsy
