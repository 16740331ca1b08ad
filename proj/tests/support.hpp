#pragma once
// Shared helpers and independent reference implementations for the tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unistd.h>

#include "drowsy/clahe.hpp"
#include "drowsy/evaluation.hpp"
#include "drowsy/image.hpp"
#include "drowsy/lstm.hpp"

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("drowsy_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen,
                                     double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(gen);
  return m;
}

inline drowsy::AutoencoderParams random_params(Eigen::Index d, Eigen::Index h, std::mt19937_64& gen,
                                               double scale = 0.5) {
  auto p = drowsy::AutoencoderParams::zeros(d, h);
  std::uniform_real_distribution<double> dist(-scale, scale);
  p.for_each_tensor([&](std::string_view, Eigen::Map<Eigen::MatrixXd> m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(gen);
  });
  return p;
}

inline drowsy::GrayImage random_image(int w, int h, std::mt19937_64& gen, int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> dist(lo, hi);
  drowsy::GrayImage img(w, h);
  for (auto& px : img.pixels()) px = static_cast<std::uint8_t>(dist(gen));
  return img;
}

// ---------------------------------------------------------------------------
// Scalar-loop LSTM autoencoder. Written with plain loops over std::vector so it
// shares no arithmetic code with the library.

using Vec = std::vector<double>;

// Templated on the scalar so the finite-difference check can run it in long
// double; parameters are read from the double tensors and widened.
template <class T>
using VecT = std::vector<T>;

template <class T>
T sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

// Gate rows are stacked input, forget, cell, output.
template <class T>
std::pair<VecT<T>, VecT<T>> oracle_cell(const VecT<T>& x, const VecT<T>& h, const VecT<T>& c,
                                        const drowsy::LstmLayerParams& p) {
  const std::size_t H = h.size();
  auto pre = [&](std::size_t gate, std::size_t j) {
    const auto row = static_cast<Eigen::Index>(gate * H + j);
    T s = p.b(row);
    for (std::size_t k = 0; k < x.size(); ++k) s += T(p.W(row, static_cast<Eigen::Index>(k))) * x[k];
    for (std::size_t k = 0; k < H; ++k) s += T(p.U(row, static_cast<Eigen::Index>(k))) * h[k];
    return s;
  };
  VecT<T> h2(H), c2(H);
  for (std::size_t j = 0; j < H; ++j) {
    const T i = sigmoid(pre(0, j));
    const T f = sigmoid(pre(1, j));
    const T g = std::tanh(pre(2, j));
    const T o = sigmoid(pre(3, j));
    c2[j] = f * c[j] + i * g;
    h2[j] = o * std::tanh(c2[j]);
  }
  return {h2, c2};
}

template <class T = double>
VecT<T> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  VecT<T> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) v[static_cast<std::size_t>(k)] = m(r, k);
  return v;
}

template <class T = double>
VecT<T> oracle_encode(const Eigen::MatrixXd& F, const drowsy::AutoencoderParams& p) {
  const std::size_t H = static_cast<std::size_t>(p.hidden_size());
  VecT<T> h1(H, T(0)), c1(H, T(0)), h2(H, T(0)), c2(H, T(0));
  for (Eigen::Index t = 0; t < F.rows(); ++t) {
    std::tie(h1, c1) = oracle_cell<T>(row_of<T>(F, t), h1, c1, p.encoder[0]);
    std::tie(h2, c2) = oracle_cell<T>(h1, h2, c2, p.encoder[1]);
  }
  return h2;
}

// Row t is the decoder's emission at step t.
template <class T = double>
std::vector<VecT<T>> oracle_decode(const VecT<T>& context, std::size_t n,
                                   const drowsy::AutoencoderParams& p) {
  const std::size_t H = context.size();
  const std::size_t D = static_cast<std::size_t>(p.feature_dim());
  VecT<T> h1(H, T(0)), c1(H, T(0)), h2(H, T(0)), c2(H, T(0));
  std::vector<VecT<T>> out;
  for (std::size_t t = 0; t < n; ++t) {
    std::tie(h1, c1) = oracle_cell<T>(context, h1, c1, p.decoder[0]);
    std::tie(h2, c2) = oracle_cell<T>(h1, h2, c2, p.decoder[1]);
    VecT<T> y(D);
    for (std::size_t d = 0; d < D; ++d) {
      T s = p.out_bias(static_cast<Eigen::Index>(d));
      for (std::size_t k = 0; k < H; ++k) {
        s += T(p.out_weight(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k))) * h2[k];
      }
      y[d] = s;
    }
    out.push_back(y);
  }
  return out;
}

// Sum over t of |F(t) - emission(N-1-t)|^2 (0-based).
template <class T = double>
T oracle_loss(const Eigen::MatrixXd& F, const std::vector<VecT<T>>& emissions) {
  const std::size_t n = static_cast<std::size_t>(F.rows());
  T loss = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const VecT<T>& e = emissions[n - 1 - t];
    for (std::size_t d = 0; d < e.size(); ++d) {
      const T diff = T(F(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d))) - e[d];
      loss += diff * diff;
    }
  }
  return loss;
}

template <class T = double>
T oracle_clip_loss(const Eigen::MatrixXd& F, const drowsy::AutoencoderParams& p) {
  return oracle_loss<T>(
      F, oracle_decode<T>(oracle_encode<T>(F, p), static_cast<std::size_t>(F.rows()), p));
}

// ---------------------------------------------------------------------------
// Mann-Whitney statistic: P(pos > neg) + 0.5 P(pos == neg) over all pairs.
inline double mann_whitney_auc(const std::vector<drowsy::ScoredClip>& s) {
  double wins = 0.0;
  double pairs = 0.0;
  for (const auto& a : s) {
    if (!a.anomalous) continue;
    for (const auto& b : s) {
      if (b.anomalous) continue;
      pairs += 1.0;
      if (a.score > b.score) {
        wins += 1.0;
      } else if (a.score == b.score) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

// Global histogram equalization by ranking: v -> round_half_up(255 * #{p <= v} / n).
inline drowsy::GrayImage oracle_global_he(const drowsy::GrayImage& img) {
  std::vector<std::uint8_t> sorted(img.pixels().begin(), img.pixels().end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<long double>(sorted.size());
  drowsy::GrayImage out = img;
  for (auto& px : out.pixels()) {
    const auto below_or_equal = static_cast<long double>(
        std::upper_bound(sorted.begin(), sorted.end(), px) - sorted.begin());
    px = static_cast<std::uint8_t>(std::floor(255.0L * below_or_equal / n + 0.5L));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Central finite differences of the clip loss over every parameter.

// The loss is evaluated by the long-double oracle and divided by the step
// actually taken after rounding the perturbed parameter to double, so the
// quotient carries truncation error only. Entries below kGradientFloor in
// magnitude are compared absolutely against it.
inline constexpr double kGradientFloor = 1e-7;

// Max elementwise relative error |a - n| / max(|a|, |n|), entries where both
// are below `floor` in magnitude compared absolutely against `floor`.
inline double max_relative_error(const drowsy::AutoencoderParams& analytic,
                                 const drowsy::AutoencoderParams& numeric, double floor) {
  std::vector<Eigen::Map<const Eigen::MatrixXd>> a;
  analytic.for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> m) { a.push_back(m); });
  double worst = 0.0;
  std::size_t k = 0;
  numeric.for_each_tensor([&](std::string_view, Eigen::Map<const Eigen::MatrixXd> n) {
    const auto& m = a[k++];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double x = m.data()[i];
      const double y = n.data()[i];
      const double scale = std::max({std::abs(x), std::abs(y), floor});
      worst = std::max(worst, std::abs(x - y) / scale);
    }
  });
  return worst;
}

inline drowsy::AutoencoderParams numeric_gradient(const Eigen::MatrixXd& F,
                                                  drowsy::AutoencoderParams p, double eps) {
  auto g = drowsy::AutoencoderParams::zeros(p.feature_dim(), p.hidden_size());
  std::vector<Eigen::Map<Eigen::MatrixXd>> out;
  g.for_each_tensor([&](std::string_view, Eigen::Map<Eigen::MatrixXd> m) { out.push_back(m); });
  std::size_t k = 0;
  p.for_each_tensor([&](std::string_view, Eigen::Map<Eigen::MatrixXd> m) {
    auto& dst = out[k++];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      const double up = saved + eps;
      const double down = saved - eps;
      m.data()[i] = up;
      const long double plus = oracle_clip_loss<long double>(F, p);
      m.data()[i] = down;
      const long double minus = oracle_clip_loss<long double>(F, p);
      m.data()[i] = saved;
      const long double step = static_cast<long double>(up) - static_cast<long double>(down);
      dst.data()[i] = static_cast<double>((plus - minus) / step);
    }
  });
  return g;
}

}  // namespace testing_support
