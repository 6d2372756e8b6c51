#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mtgcd/core/errors.hpp"
#include "mtgcd/nn/autograd.hpp"

namespace mtgcd::nn {

namespace detail {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
void check4(const Tensor<T>& t, const char* who) {
    if (t.ndim() != 4) throw ConfigError(std::string(who) + ": expected NCHW tensor");
}

// Unpacks x(n, :, :, :) into a (Cin*K*K) x (Hout*Wout) patch matrix.
template <typename T>
void im2col(const Tensor<T>& x, int n, int K, int stride, int pad, int Hout, int Wout,
            Tensor<T>& col) {
    const int C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t HW = int64_t(Hout) * Wout;
    T* out = col.data();
    for (int c = 0; c < C; ++c) {
        for (int kh = 0; kh < K; ++kh) {
            for (int kw = 0; kw < K; ++kw) {
                const int64_t row = (int64_t(c) * K + kh) * K + kw;
                T* dst = out + row * HW;
                for (int oh = 0; oh < Hout; ++oh) {
                    const int ih = oh * stride - pad + kh;
                    if (ih < 0 || ih >= H) {
                        for (int ow = 0; ow < Wout; ++ow) dst[int64_t(oh) * Wout + ow] = T(0);
                        continue;
                    }
                    for (int ow = 0; ow < Wout; ++ow) {
                        const int iw = ow * stride - pad + kw;
                        dst[int64_t(oh) * Wout + ow] =
                            (iw < 0 || iw >= W) ? T(0) : x.at4(n, c, ih, iw);
                    }
                }
            }
        }
    }
}

// Scatter-add transpose of im2col.
template <typename T>
void col2im_add(const Tensor<T>& col, int n, int K, int stride, int pad, int Hout, int Wout,
                Tensor<T>& gx) {
    const int C = gx.dim(1), H = gx.dim(2), W = gx.dim(3);
    const int64_t HW = int64_t(Hout) * Wout;
    const T* src = col.data();
    for (int c = 0; c < C; ++c) {
        for (int kh = 0; kh < K; ++kh) {
            for (int kw = 0; kw < K; ++kw) {
                const int64_t row = (int64_t(c) * K + kh) * K + kw;
                const T* s = src + row * HW;
                for (int oh = 0; oh < Hout; ++oh) {
                    const int ih = oh * stride - pad + kh;
                    if (ih < 0 || ih >= H) continue;
                    for (int ow = 0; ow < Wout; ++ow) {
                        const int iw = ow * stride - pad + kw;
                        if (iw < 0 || iw >= W) continue;
                        gx.at4(n, c, ih, iw) += s[int64_t(oh) * Wout + ow];
                    }
                }
            }
        }
    }
}

} // namespace detail

// weight {Cout, Cin, K, K}, optional bias {Cout}. Patches are re-extracted in
// the backward pass instead of cached; with one core the extra im2col is
// cheaper than holding every layer's column buffer alive.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride = 1,
              int pad = 0) {
    detail::check4(x->value, "conv2d input");
    if (weight->value.ndim() != 4) throw ConfigError("conv2d: weight must be {Cout,Cin,K,K}");
    const int N = x->value.dim(0), Cin = x->value.dim(1), H = x->value.dim(2),
              W = x->value.dim(3);
    const int Cout = weight->value.dim(0), K = weight->value.dim(2);
    if (weight->value.dim(1) != Cin) throw ConfigError("conv2d: channel mismatch");
    if (weight->value.dim(3) != K) throw ConfigError("conv2d: kernel must be square");
    if (bias && bias->value.numel() != Cout) throw ConfigError("conv2d: bias size mismatch");
    const int Hout = (H + 2 * pad - K) / stride + 1;
    const int Wout = (W + 2 * pad - K) / stride + 1;
    if (Hout <= 0 || Wout <= 0) throw ConfigError("conv2d: empty output");
    const int64_t HW = int64_t(Hout) * Wout;
    const int64_t CKK = int64_t(Cin) * K * K;
    const bool pointwise = (K == 1 && stride == 1 && pad == 0);

    using Mat = detail::MatRM<T>;
    Tensor<T> y({N, Cout, Hout, Wout});
    Eigen::Map<const Mat> Wm(weight->value.data(), Cout, CKK);
    Tensor<T> col = pointwise ? Tensor<T>({1}) : Tensor<T>({(int)CKK, (int)HW});
    for (int n = 0; n < N; ++n) {
        Eigen::Map<Mat> Ym(y.data() + int64_t(n) * Cout * HW, Cout, HW);
        if (pointwise) {
            Eigen::Map<const Mat> Xm(x->value.data() + int64_t(n) * Cin * HW, Cin, HW);
            Ym.noalias() = Wm * Xm;
        } else {
            detail::im2col(x->value, n, K, stride, pad, Hout, Wout, col);
            Eigen::Map<const Mat> Cm(col.data(), CKK, HW);
            Ym.noalias() = Wm * Cm;
        }
        if (bias)
            for (int c = 0; c < Cout; ++c) Ym.row(c).array() += bias->value[c];
    }

    std::vector<Var<T>> parents{x, weight};
    if (bias) parents.push_back(bias);
    return make_node<T>(
        std::move(y), std::move(parents),
        [x, weight, bias, stride, pad, N, Cin, Cout, K, Hout, Wout, HW, CKK,
         pointwise](Node<T>& self) {
            using M = detail::MatRM<T>;
            Eigen::Map<const M> Wm(weight->value.data(), Cout, CKK);
            Tensor<T> col = pointwise ? Tensor<T>({1}) : Tensor<T>({(int)CKK, (int)HW});
            Tensor<T> dcol = col;
            const bool need_x = x->requires_grad;
            const bool need_w = weight->requires_grad;
            for (int n = 0; n < N; ++n) {
                Eigen::Map<const M> dYm(self.grad.data() + int64_t(n) * Cout * HW, Cout, HW);
                if (pointwise) {
                    if (need_w) {
                        Eigen::Map<const M> Xm(x->value.data() + int64_t(n) * Cin * HW, Cin, HW);
                        Eigen::Map<M> dWm(weight->ensure_grad().data(), Cout, CKK);
                        dWm.noalias() += dYm * Xm.transpose();
                    }
                    if (need_x) {
                        Eigen::Map<M> dXm(x->ensure_grad().data() + int64_t(n) * Cin * HW, Cin,
                                          HW);
                        dXm.noalias() += Wm.transpose() * dYm;
                    }
                } else {
                    if (need_w || need_x)
                        detail::im2col(x->value, n, K, stride, pad, Hout, Wout, col);
                    if (need_w) {
                        Eigen::Map<const M> Cm(col.data(), CKK, HW);
                        Eigen::Map<M> dWm(weight->ensure_grad().data(), Cout, CKK);
                        dWm.noalias() += dYm * Cm.transpose();
                    }
                    if (need_x) {
                        Eigen::Map<M> dCm(dcol.data(), CKK, HW);
                        dCm.noalias() = Wm.transpose() * dYm;
                        detail::col2im_add(dcol, n, K, stride, pad, Hout, Wout, x->ensure_grad());
                    }
                }
                if (bias && bias->requires_grad) {
                    // Fixed-order summation: Eigen's redux splits by pointer
                    // alignment, which would make grads depend on the heap.
                    Tensor<T>& db = bias->ensure_grad();
                    const T* g = self.grad.data() + int64_t(n) * Cout * HW;
                    for (int c = 0; c < Cout; ++c) {
                        T s = T(0);
                        for (int64_t i = 0; i < HW; ++i) s += g[int64_t(c) * HW + i];
                        db[c] += s;
                    }
                }
            }
        });
}

enum class NormMode { batch_train, batch_eval, instance };

// gamma/beta {C}. Batch modes read (and in training update) the caller-owned
// running stats; instance mode normalizes each (n, c) plane independently and
// ignores them. Variance is biased everywhere, including the running buffer.
template <typename T>
Var<T> norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, NormMode mode,
              Tensor<T>* running_mean = nullptr, Tensor<T>* running_var = nullptr,
              T momentum = T(0.1), T eps = T(1e-5)) {
    detail::check4(x->value, "norm2d input");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    if (gamma->value.numel() != C || beta->value.numel() != C)
        throw ConfigError("norm2d: affine parameter size mismatch");
    if (mode != NormMode::instance && (!running_mean || !running_var))
        throw ConfigError("norm2d: batch modes need running statistics");

    const int64_t plane = int64_t(H) * W;
    Tensor<T> y({N, C, H, W});

    if (mode == NormMode::instance) {
        std::vector<T> mean(size_t(N) * C), invstd(size_t(N) * C);
        for (int n = 0; n < N; ++n) {
            for (int c = 0; c < C; ++c) {
                const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
                T m = T(0);
                for (int64_t i = 0; i < plane; ++i) m += px[i];
                m /= T(plane);
                T v = T(0);
                for (int64_t i = 0; i < plane; ++i) {
                    const T d = px[i] - m;
                    v += d * d;
                }
                v /= T(plane);
                const T is = T(1) / std::sqrt(v + eps);
                mean[size_t(n) * C + c] = m;
                invstd[size_t(n) * C + c] = is;
                const T g = gamma->value[c], b = beta->value[c];
                T* py = y.data() + (int64_t(n) * C + c) * plane;
                for (int64_t i = 0; i < plane; ++i) py[i] = g * (px[i] - m) * is + b;
            }
        }
        return make_node<T>(
            std::move(y), {x, gamma, beta},
            [x, gamma, beta, N, C, plane, mean = std::move(mean),
             invstd = std::move(invstd)](Node<T>& self) {
                for (int n = 0; n < N; ++n) {
                    for (int c = 0; c < C; ++c) {
                        const T m = mean[size_t(n) * C + c], is = invstd[size_t(n) * C + c];
                        const T g = gamma->value[c];
                        const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
                        const T* pg = self.grad.data() + (int64_t(n) * C + c) * plane;
                        T s1 = T(0), s2 = T(0);
                        for (int64_t i = 0; i < plane; ++i) {
                            s1 += pg[i];
                            s2 += pg[i] * (px[i] - m) * is;
                        }
                        if (beta->requires_grad) beta->ensure_grad()[c] += s1;
                        if (gamma->requires_grad) gamma->ensure_grad()[c] += s2;
                        if (x->requires_grad) {
                            T* pdx = x->ensure_grad().data() + (int64_t(n) * C + c) * plane;
                            const T inv_m = T(1) / T(plane);
                            for (int64_t i = 0; i < plane; ++i) {
                                const T xh = (px[i] - m) * is;
                                pdx[i] += g * is * (pg[i] - s1 * inv_m - xh * s2 * inv_m);
                            }
                        }
                    }
                }
            });
    }

    std::vector<T> mean(C), invstd(C);
    if (mode == NormMode::batch_train) {
        const int64_t M = int64_t(N) * plane;
        for (int c = 0; c < C; ++c) {
            T m = T(0);
            for (int n = 0; n < N; ++n) {
                const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
                for (int64_t i = 0; i < plane; ++i) m += px[i];
            }
            m /= T(M);
            T v = T(0);
            for (int n = 0; n < N; ++n) {
                const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    const T d = px[i] - m;
                    v += d * d;
                }
            }
            v /= T(M);
            mean[c] = m;
            invstd[c] = T(1) / std::sqrt(v + eps);
            (*running_mean)[c] = (T(1) - momentum) * (*running_mean)[c] + momentum * m;
            (*running_var)[c] = (T(1) - momentum) * (*running_var)[c] + momentum * v;
        }
    } else {
        for (int c = 0; c < C; ++c) {
            mean[c] = (*running_mean)[c];
            invstd[c] = T(1) / std::sqrt((*running_var)[c] + eps);
        }
    }
    for (int n = 0; n < N; ++n) {
        for (int c = 0; c < C; ++c) {
            const T m = mean[c], is = invstd[c];
            const T g = gamma->value[c], b = beta->value[c];
            const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
            T* py = y.data() + (int64_t(n) * C + c) * plane;
            for (int64_t i = 0; i < plane; ++i) py[i] = g * (px[i] - m) * is + b;
        }
    }
    const bool train_stats = (mode == NormMode::batch_train);
    return make_node<T>(
        std::move(y), {x, gamma, beta},
        [x, gamma, beta, N, C, plane, mean = std::move(mean), invstd = std::move(invstd),
         train_stats](Node<T>& self) {
            const int64_t M = int64_t(N) * plane;
            for (int c = 0; c < C; ++c) {
                const T m = mean[c], is = invstd[c], g = gamma->value[c];
                T s1 = T(0), s2 = T(0);
                for (int n = 0; n < N; ++n) {
                    const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
                    const T* pg = self.grad.data() + (int64_t(n) * C + c) * plane;
                    for (int64_t i = 0; i < plane; ++i) {
                        s1 += pg[i];
                        s2 += pg[i] * (px[i] - m) * is;
                    }
                }
                if (beta->requires_grad) beta->ensure_grad()[c] += s1;
                if (gamma->requires_grad) gamma->ensure_grad()[c] += s2;
                if (!x->requires_grad) continue;
                const T inv_m = T(1) / T(M);
                for (int n = 0; n < N; ++n) {
                    const T* px = x->value.data() + (int64_t(n) * C + c) * plane;
                    const T* pg = self.grad.data() + (int64_t(n) * C + c) * plane;
                    T* pdx = x->ensure_grad().data() + (int64_t(n) * C + c) * plane;
                    if (train_stats) {
                        for (int64_t i = 0; i < plane; ++i) {
                            const T xh = (px[i] - m) * is;
                            pdx[i] += g * is * (pg[i] - s1 * inv_m - xh * s2 * inv_m);
                        }
                    } else {
                        // Running statistics are constants, so the Jacobian is diagonal.
                        for (int64_t i = 0; i < plane; ++i) pdx[i] += g * is * pg[i];
                    }
                }
            }
        });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
    Tensor<T> y = x->value;
    for (int64_t i = 0; i < y.numel(); ++i)
        if (y[i] < T(0)) y[i] = T(0);
    return make_node<T>(std::move(y), {x}, [x](Node<T>& self) {
        if (!x->requires_grad) return;
        Tensor<T>& gx = x->ensure_grad();
        for (int64_t i = 0; i < gx.numel(); ++i)
            if (self.value[i] > T(0)) gx[i] += self.grad[i];
    });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
    Tensor<T> y = x->value;
    for (int64_t i = 0; i < y.numel(); ++i) y[i] = T(1) / (T(1) + std::exp(-y[i]));
    return make_node<T>(std::move(y), {x}, [x](Node<T>& self) {
        if (!x->requires_grad) return;
        Tensor<T>& gx = x->ensure_grad();
        for (int64_t i = 0; i < gx.numel(); ++i) {
            const T s = self.value[i];
            gx[i] += self.grad[i] * s * (T(1) - s);
        }
    });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    if (!a->value.same_shape(b->value)) throw ConfigError("add: shape mismatch");
    Tensor<T> y = a->value;
    for (int64_t i = 0; i < y.numel(); ++i) y[i] += b->value[i];
    return make_node<T>(std::move(y), {a, b}, [a, b](Node<T>& self) {
        if (a->requires_grad) {
            Tensor<T>& ga = a->ensure_grad();
            for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += self.grad[i];
        }
        if (b->requires_grad) {
            Tensor<T>& gb = b->ensure_grad();
            for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += self.grad[i];
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    if (!a->value.same_shape(b->value)) throw ConfigError("mul: shape mismatch");
    Tensor<T> y = a->value;
    for (int64_t i = 0; i < y.numel(); ++i) y[i] *= b->value[i];
    return make_node<T>(std::move(y), {a, b}, [a, b](Node<T>& self) {
        if (a->requires_grad) {
            Tensor<T>& ga = a->ensure_grad();
            for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += self.grad[i] * b->value[i];
        }
        if (b->requires_grad) {
            Tensor<T>& gb = b->ensure_grad();
            for (int64_t i = 0; i < gb.numel(); ++i) gb[i] += self.grad[i] * a->value[i];
        }
    });
}

// Pools x down to out_h x out_w cells; cell (i, j) averages the input window
// [floor(i*H/oh), ceil((i+1)*H/oh)) x [floor(j*W/ow), ceil((j+1)*W/ow)).
template <typename T>
Var<T> adaptive_avg_pool(const Var<T>& x, int out_h, int out_w) {
    detail::check4(x->value, "adaptive_avg_pool input");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    if (out_h <= 0 || out_h > H || out_w <= 0 || out_w > W)
        throw ConfigError("adaptive_avg_pool: bad output size");
    auto lo = [](int o, int in, int out) { return (o * in) / out; };
    auto hi = [](int o, int in, int out) { return ((o + 1) * in + out - 1) / out; };
    Tensor<T> y({N, C, out_h, out_w});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T* src = x->value.data() + (int64_t(n) * C + c) * H * W;
            T* dst = y.data() + (int64_t(n) * C + c) * out_h * out_w;
            for (int oh = 0; oh < out_h; ++oh) {
                const int h0 = lo(oh, H, out_h), h1 = hi(oh, H, out_h);
                for (int ow = 0; ow < out_w; ++ow) {
                    const int w0 = lo(ow, W, out_w), w1 = hi(ow, W, out_w);
                    T acc = T(0);
                    for (int ih = h0; ih < h1; ++ih)
                        for (int iw = w0; iw < w1; ++iw) acc += src[int64_t(ih) * W + iw];
                    dst[int64_t(oh) * out_w + ow] = acc / T((h1 - h0) * (w1 - w0));
                }
            }
        }
    return make_node<T>(std::move(y), {x}, [x, N, C, H, W, out_h, out_w, lo, hi](Node<T>& self) {
        if (!x->requires_grad) return;
        Tensor<T>& gx = x->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const T* gy = self.grad.data() + (int64_t(n) * C + c) * out_h * out_w;
                T* dst = gx.data() + (int64_t(n) * C + c) * H * W;
                for (int oh = 0; oh < out_h; ++oh) {
                    const int h0 = lo(oh, H, out_h), h1 = hi(oh, H, out_h);
                    for (int ow = 0; ow < out_w; ++ow) {
                        const int w0 = lo(ow, W, out_w), w1 = hi(ow, W, out_w);
                        const T g = gy[int64_t(oh) * out_w + ow] / T((h1 - h0) * (w1 - w0));
                        for (int ih = h0; ih < h1; ++ih)
                            for (int iw = w0; iw < w1; ++iw) dst[int64_t(ih) * W + iw] += g;
                    }
                }
            }
    });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw ConfigError("concat_channels: no inputs");
    detail::check4(xs[0]->value, "concat_channels input");
    const int N = xs[0]->value.dim(0), H = xs[0]->value.dim(2), W = xs[0]->value.dim(3);
    int Ctot = 0;
    for (const auto& v : xs) {
        detail::check4(v->value, "concat_channels input");
        if (v->value.dim(0) != N || v->value.dim(2) != H || v->value.dim(3) != W)
            throw ConfigError("concat_channels: spatial/batch mismatch");
        Ctot += v->value.dim(1);
    }
    const int64_t plane = int64_t(H) * W;
    Tensor<T> y({N, Ctot, H, W});
    for (int n = 0; n < N; ++n) {
        int64_t coff = 0;
        for (const auto& v : xs) {
            const int Ci = v->value.dim(1);
            const T* src = v->value.data() + int64_t(n) * Ci * plane;
            T* dst = y.data() + (int64_t(n) * Ctot + coff) * plane;
            std::copy(src, src + int64_t(Ci) * plane, dst);
            coff += Ci;
        }
    }
    return make_node<T>(std::move(y), xs, [xs, N, Ctot, plane](Node<T>& self) {
        for (int n = 0; n < N; ++n) {
            int64_t coff = 0;
            for (const auto& v : xs) {
                const int Ci = v->value.dim(1);
                if (v->requires_grad) {
                    const T* src = self.grad.data() + (int64_t(n) * Ctot + coff) * plane;
                    T* dst = v->ensure_grad().data() + int64_t(n) * Ci * plane;
                    for (int64_t i = 0; i < int64_t(Ci) * plane; ++i) dst[i] += src[i];
                }
                coff += Ci;
            }
        }
    });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, int c0, int c1) {
    detail::check4(x->value, "slice_channels input");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    if (c0 < 0 || c1 > C || c0 >= c1) throw ConfigError("slice_channels: bad range");
    const int Cs = c1 - c0;
    const int64_t plane = int64_t(H) * W;
    Tensor<T> y({N, Cs, H, W});
    for (int n = 0; n < N; ++n) {
        const T* src = x->value.data() + (int64_t(n) * C + c0) * plane;
        std::copy(src, src + int64_t(Cs) * plane, y.data() + int64_t(n) * Cs * plane);
    }
    return make_node<T>(std::move(y), {x}, [x, c0, Cs, N, C, plane](Node<T>& self) {
        if (!x->requires_grad) return;
        Tensor<T>& gx = x->ensure_grad();
        for (int n = 0; n < N; ++n) {
            const T* src = self.grad.data() + int64_t(n) * Cs * plane;
            T* dst = gx.data() + (int64_t(n) * C + c0) * plane;
            for (int64_t i = 0; i < int64_t(Cs) * plane; ++i) dst[i] += src[i];
        }
    });
}

// Bilinear resize with half-pixel (align_corners = false) sampling.
template <typename T>
Var<T> upsample_bilinear(const Var<T>& x, int out_h, int out_w) {
    detail::check4(x->value, "upsample input");
    const int N = x->value.dim(0), C = x->value.dim(1), H = x->value.dim(2), W = x->value.dim(3);
    if (out_h <= 0 || out_w <= 0) throw ConfigError("upsample: bad output size");

    struct Tap {
        int lo, hi;
        T w_hi;
    };
    auto make_taps = [](int in, int out) {
        std::vector<Tap> taps(out);
        const double scale = double(in) / double(out);
        for (int o = 0; o < out; ++o) {
            double src = (o + 0.5) * scale - 0.5;
            if (src < 0) src = 0;
            const double mx = double(in - 1);
            if (src > mx) src = mx;
            const int lo = int(src);
            taps[o] = {lo, std::min(lo + 1, in - 1), T(src - lo)};
        }
        return taps;
    };
    const auto th = make_taps(H, out_h);
    const auto tw = make_taps(W, out_w);

    Tensor<T> y({N, C, out_h, out_w});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const T* src = x->value.data() + (int64_t(n) * C + c) * H * W;
            T* dst = y.data() + (int64_t(n) * C + c) * out_h * out_w;
            for (int oh = 0; oh < out_h; ++oh) {
                const auto& r = th[oh];
                for (int ow = 0; ow < out_w; ++ow) {
                    const auto& s = tw[ow];
                    const T a = src[int64_t(r.lo) * W + s.lo], b = src[int64_t(r.lo) * W + s.hi];
                    const T cc = src[int64_t(r.hi) * W + s.lo], d = src[int64_t(r.hi) * W + s.hi];
                    const T top = a + (b - a) * s.w_hi;
                    const T bot = cc + (d - cc) * s.w_hi;
                    dst[int64_t(oh) * out_w + ow] = top + (bot - top) * r.w_hi;
                }
            }
        }
    return make_node<T>(std::move(y), {x}, [x, th, tw, N, C, H, W, out_h, out_w](Node<T>& self) {
        if (!x->requires_grad) return;
        Tensor<T>& gx = x->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const T* gy = self.grad.data() + (int64_t(n) * C + c) * out_h * out_w;
                T* dst = gx.data() + (int64_t(n) * C + c) * H * W;
                for (int oh = 0; oh < out_h; ++oh) {
                    const auto& r = th[oh];
                    for (int ow = 0; ow < out_w; ++ow) {
                        const auto& s = tw[ow];
                        const T g = gy[int64_t(oh) * out_w + ow];
                        const T whi = s.w_hi, wlo = T(1) - s.w_hi;
                        const T rhi = r.w_hi, rlo = T(1) - r.w_hi;
                        dst[int64_t(r.lo) * W + s.lo] += g * rlo * wlo;
                        dst[int64_t(r.lo) * W + s.hi] += g * rlo * whi;
                        dst[int64_t(r.hi) * W + s.lo] += g * rhi * wlo;
                        dst[int64_t(r.hi) * W + s.hi] += g * rhi * whi;
                    }
                }
            }
    });
}

template <typename T>
Var<T> scale(const Var<T>& x, T s) {
    Tensor<T> y = x->value;
    for (int64_t i = 0; i < y.numel(); ++i) y[i] *= s;
    return make_node<T>(std::move(y), {x}, [x, s](Node<T>& self) {
        if (!x->requires_grad) return;
        Tensor<T>& gx = x->ensure_grad();
        for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += self.grad[i] * s;
    });
}

// Scalar combination sum_i coeff_i * term_i; every term must be a 1-element
// tensor. Loss aggregation lives here so term weights stay out of the graph.
template <typename T>
Var<T> affine_combine(const std::vector<std::pair<Var<T>, T>>& terms) {
    if (terms.empty()) throw ConfigError("affine_combine: no terms");
    T total = T(0);
    std::vector<Var<T>> parents;
    parents.reserve(terms.size());
    for (const auto& [v, c] : terms) {
        if (v->value.numel() != 1) throw ConfigError("affine_combine: term is not scalar");
        total += c * v->value[0];
        parents.push_back(v);
    }
    std::vector<T> coeffs;
    coeffs.reserve(terms.size());
    for (const auto& [v, c] : terms) coeffs.push_back(c);
    Tensor<T> y({1});
    y[0] = total;
    return make_node<T>(std::move(y), std::move(parents),
                        [terms, coeffs](Node<T>& self) {
                            for (size_t i = 0; i < terms.size(); ++i) {
                                const auto& v = terms[i].first;
                                if (v->requires_grad) v->ensure_grad()[0] += self.grad[0] * coeffs[i];
                            }
                        });
}

// --- loss kernels ------------------------------------------------------
//
// Every masked reduction iterates only pixels with mask != 0, so excluded
// pixels cannot perturb the result even at the last bit.

template <typename T>
struct MaskedLoss {
    Var<T> loss;        // scalar; detached zero when count == 0
    int64_t count = 0;  // supervised pixels that contributed
};

template <typename T>
MaskedLoss<T> masked_cross_entropy(const Var<T>& logits, const Tensor<int32_t>& labels,
                                   const Tensor<uint8_t>& mask) {
    detail::check4(logits->value, "cross_entropy logits");
    const int N = logits->value.dim(0), C = logits->value.dim(1), H = logits->value.dim(2),
              W = logits->value.dim(3);
    if (labels.ndim() != 3 || labels.dim(0) != N || labels.dim(1) != H || labels.dim(2) != W)
        throw ConfigError("cross_entropy: label shape mismatch");
    if (mask.shape() != labels.shape()) throw ConfigError("cross_entropy: mask shape mismatch");
    const int64_t plane = int64_t(H) * W;

    T total = T(0);
    int64_t count = 0;
    for (int n = 0; n < N; ++n) {
        const T* pl = logits->value.data() + int64_t(n) * C * plane;
        const int32_t* lab = labels.data() + int64_t(n) * plane;
        const uint8_t* pm = mask.data() + int64_t(n) * plane;
        for (int64_t i = 0; i < plane; ++i) {
            if (!pm[i]) continue;
            const int32_t t = lab[i];
            if (t < 0 || t >= C) throw NumericalError("cross_entropy: label out of range");
            T mx = pl[i];
            for (int c = 1; c < C; ++c) mx = std::max(mx, pl[int64_t(c) * plane + i]);
            T lse = T(0);
            for (int c = 0; c < C; ++c) lse += std::exp(pl[int64_t(c) * plane + i] - mx);
            lse = mx + std::log(lse);
            total += lse - pl[int64_t(t) * plane + i];
            ++count;
        }
    }
    if (count == 0) {
        Tensor<T> z({1});
        z[0] = T(0);
        return {make_leaf<T>(std::move(z), false), 0};
    }
    Tensor<T> y({1});
    y[0] = total / T(count);
    Var<T> out = make_node<T>(
        std::move(y), {logits}, [logits, labels, mask, N, C, plane, count](Node<T>& self) {
            if (!logits->requires_grad) return;
            Tensor<T>& gx = logits->ensure_grad();
            const T gscale = self.grad[0] / T(count);
            std::vector<T> prob(C);
            for (int n = 0; n < N; ++n) {
                const T* pl = logits->value.data() + int64_t(n) * C * plane;
                T* pgx = gx.data() + int64_t(n) * C * plane;
                const int32_t* lab = labels.data() + int64_t(n) * plane;
                const uint8_t* pm = mask.data() + int64_t(n) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    if (!pm[i]) continue;
                    T mx = pl[i];
                    for (int c = 1; c < C; ++c) mx = std::max(mx, pl[int64_t(c) * plane + i]);
                    T sum = T(0);
                    for (int c = 0; c < C; ++c) {
                        prob[c] = std::exp(pl[int64_t(c) * plane + i] - mx);
                        sum += prob[c];
                    }
                    for (int c = 0; c < C; ++c) {
                        const T p = prob[c] / sum;
                        const T ind = (c == lab[i]) ? T(1) : T(0);
                        pgx[int64_t(c) * plane + i] += gscale * (p - ind);
                    }
                }
            }
        });
    return {out, count};
}

// Soft dice over the foreground channel of 2-class logits, pooled across the
// whole batch. Returns 1 - dice.
template <typename T>
MaskedLoss<T> masked_dice(const Var<T>& logits, const Tensor<int32_t>& target,
                          const Tensor<uint8_t>& mask, T eps = T(1)) {
    detail::check4(logits->value, "dice logits");
    const int N = logits->value.dim(0), C = logits->value.dim(1), H = logits->value.dim(2),
              W = logits->value.dim(3);
    if (C != 2) throw ConfigError("dice: expects 2-class logits");
    if (target.ndim() != 3 || target.dim(0) != N || target.dim(1) != H || target.dim(2) != W)
        throw ConfigError("dice: target shape mismatch");
    if (mask.shape() != target.shape()) throw ConfigError("dice: mask shape mismatch");
    const int64_t plane = int64_t(H) * W;

    // p(fg) = sigmoid(l1 - l0)
    T sum_pg = T(0), sum_p = T(0), sum_g = T(0);
    int64_t count = 0;
    for (int n = 0; n < N; ++n) {
        const T* pl = logits->value.data() + int64_t(n) * C * plane;
        const int32_t* tg = target.data() + int64_t(n) * plane;
        const uint8_t* pm = mask.data() + int64_t(n) * plane;
        for (int64_t i = 0; i < plane; ++i) {
            if (!pm[i]) continue;
            const T p = T(1) / (T(1) + std::exp(pl[i] - pl[plane + i]));
            const T g = tg[i] ? T(1) : T(0);
            sum_pg += p * g;
            sum_p += p;
            sum_g += g;
            ++count;
        }
    }
    if (count == 0) {
        Tensor<T> z({1});
        z[0] = T(0);
        return {make_leaf<T>(std::move(z), false), 0};
    }
    const T denom = sum_p + sum_g + eps;
    const T dice = (T(2) * sum_pg + eps) / denom;
    Tensor<T> y({1});
    y[0] = T(1) - dice;
    Var<T> out = make_node<T>(
        std::move(y), {logits},
        [logits, target, mask, N, plane, sum_pg, denom, eps](Node<T>& self) {
            if (!logits->requires_grad) return;
            Tensor<T>& gx = logits->ensure_grad();
            const T g0 = self.grad[0];
            const T num = T(2) * sum_pg + eps;
            for (int n = 0; n < N; ++n) {
                const T* pl = logits->value.data() + int64_t(n) * 2 * plane;
                T* pgx = gx.data() + int64_t(n) * 2 * plane;
                const int32_t* tg = target.data() + int64_t(n) * plane;
                const uint8_t* pm = mask.data() + int64_t(n) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    if (!pm[i]) continue;
                    const T p = T(1) / (T(1) + std::exp(pl[i] - pl[plane + i]));
                    const T g = tg[i] ? T(1) : T(0);
                    // d(1-dice)/dp, then chain through p = sigmoid(l1 - l0)
                    const T ddice_dp = (T(2) * g * denom - num) / (denom * denom);
                    const T dp = -g0 * ddice_dp * p * (T(1) - p);
                    pgx[plane + i] += dp;
                    pgx[i] -= dp;
                }
            }
        });
    return {out, count};
}

// Mean endpoint error between 2-channel vector predictions and targets.
template <typename T>
MaskedLoss<T> masked_epe(const Var<T>& pred, const Tensor<T>& target, const Tensor<uint8_t>& mask) {
    detail::check4(pred->value, "epe pred");
    const int N = pred->value.dim(0), C = pred->value.dim(1), H = pred->value.dim(2),
              W = pred->value.dim(3);
    if (C != 2) throw ConfigError("epe: expects 2-channel prediction");
    if (!target.same_shape(pred->value)) throw ConfigError("epe: target shape mismatch");
    if (mask.ndim() != 3 || mask.dim(0) != N || mask.dim(1) != H || mask.dim(2) != W)
        throw ConfigError("epe: mask shape mismatch");
    const int64_t plane = int64_t(H) * W;
    const T eps = T(1e-12);

    T total = T(0);
    int64_t count = 0;
    for (int n = 0; n < N; ++n) {
        const T* pp = pred->value.data() + int64_t(n) * 2 * plane;
        const T* pt = target.data() + int64_t(n) * 2 * plane;
        const uint8_t* pm = mask.data() + int64_t(n) * plane;
        for (int64_t i = 0; i < plane; ++i) {
            if (!pm[i]) continue;
            const T dx = pp[i] - pt[i];
            const T dy = pp[plane + i] - pt[plane + i];
            total += std::sqrt(dx * dx + dy * dy + eps);
            ++count;
        }
    }
    if (count == 0) {
        Tensor<T> z({1});
        z[0] = T(0);
        return {make_leaf<T>(std::move(z), false), 0};
    }
    Tensor<T> y({1});
    y[0] = total / T(count);
    Var<T> out = make_node<T>(
        std::move(y), {pred}, [pred, target, mask, N, plane, count, eps](Node<T>& self) {
            if (!pred->requires_grad) return;
            Tensor<T>& gx = pred->ensure_grad();
            const T gscale = self.grad[0] / T(count);
            for (int n = 0; n < N; ++n) {
                const T* pp = pred->value.data() + int64_t(n) * 2 * plane;
                const T* pt = target.data() + int64_t(n) * 2 * plane;
                T* pgx = gx.data() + int64_t(n) * 2 * plane;
                const uint8_t* pm = mask.data() + int64_t(n) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    if (!pm[i]) continue;
                    const T dx = pp[i] - pt[i];
                    const T dy = pp[plane + i] - pt[plane + i];
                    const T inv = T(1) / std::sqrt(dx * dx + dy * dy + eps);
                    pgx[i] += gscale * dx * inv;
                    pgx[plane + i] += gscale * dy * inv;
                }
            }
        });
    return {out, count};
}

} // namespace mtgcd::nn
