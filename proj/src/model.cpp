#include "shadowlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "shadowlab/rng.hpp"

namespace shadowlab {

namespace {

using json = nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

double next_unit(std::mt19937& rng) {
    // (0,1), portable across platforms (raw mt19937 output only).
    return (static_cast<double>(rng()) + 0.5) / 4294967296.0;
}

double next_gaussian(std::mt19937& rng) {
    double u1 = next_unit(rng);
    double u2 = next_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// C[m,n] = A[m,k] * B[n,k]^T   (rows of both operands contiguous)
template <typename T>
void matmul_abt(const T* a, const T* b, T* c, std::int64_t m, std::int64_t n, std::int64_t k) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        const T* ai = a + i * k;
        T* ci = c + i * n;
        for (std::int64_t j = 0; j < n; ++j) {
            const T* bj = b + j * k;
            T acc = 0;
            for (std::int64_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
            ci[j] = acc;
        }
    }
}

// C[m,n] = A[m,k] * B[k,n]
template <typename T>
void matmul_ab(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        T* ci = c + i * n;
        std::fill(ci, ci + n, T(0));
        const T* ai = a + i * k;
        for (std::int64_t t = 0; t < k; ++t) {
            const T coef = ai[t];
            if (coef == T(0)) continue;
            const T* bt = b + t * n;
            for (std::int64_t j = 0; j < n; ++j) ci[j] += coef * bt[j];
        }
    }
}

// C[k,n] = A[m,k]^T * B[m,n]   (reduction over rows, fixed order per output row)
template <typename T>
void matmul_atb(const T* a, const T* b, T* c, std::int64_t m, std::int64_t k, std::int64_t n) {
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < k; ++j) {
        T* cj = c + j * n;
        std::fill(cj, cj + n, T(0));
        for (std::int64_t i = 0; i < m; ++i) {
            const T coef = a[i * k + j];
            if (coef == T(0)) continue;
            const T* bi = b + i * n;
            for (std::int64_t t = 0; t < n; ++t) cj[t] += coef * bi[t];
        }
    }
}

// 3x3, pad-1 im2col: rows indexed by (sample, y, x), columns by (ch, ky, kx).
template <typename T>
void im2col3(const T* x, std::int64_t n, std::int64_t ch, std::int64_t size, T* col) {
    const std::int64_t row_w = ch * 9;
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < n; ++s) {
        const T* xs = x + s * ch * size * size;
        T* cs = col + s * size * size * row_w;
        for (std::int64_t y = 0; y < size; ++y) {
            for (std::int64_t xx = 0; xx < size; ++xx) {
                T* row = cs + (y * size + xx) * row_w;
                for (std::int64_t c = 0; c < ch; ++c) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const std::int64_t sy = y + ky - 1;
                        for (int kx = 0; kx < 3; ++kx) {
                            const std::int64_t sx = xx + kx - 1;
                            T v = 0;
                            if (sy >= 0 && sy < size && sx >= 0 && sx < size)
                                v = xs[(c * size + sy) * size + sx];
                            row[(c * 3 + ky) * 3 + kx] = v;
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im3(const T* col, std::int64_t n, std::int64_t ch, std::int64_t size, T* dx) {
    const std::int64_t row_w = ch * 9;
    std::fill(dx, dx + n * ch * size * size, T(0));
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < n; ++s) {
        T* dxs = dx + s * ch * size * size;
        const T* cs = col + s * size * size * row_w;
        for (std::int64_t y = 0; y < size; ++y) {
            for (std::int64_t xx = 0; xx < size; ++xx) {
                const T* row = cs + (y * size + xx) * row_w;
                for (std::int64_t c = 0; c < ch; ++c) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const std::int64_t sy = y + ky - 1;
                        if (sy < 0 || sy >= size) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const std::int64_t sx = xx + kx - 1;
                            if (sx < 0 || sx >= size) continue;
                            dxs[(c * size + sy) * size + sx] += row[(c * 3 + ky) * 3 + kx];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

NetConfig NetConfig::from_spec(const CnnSpec& spec) {
    if (spec.input_channels != 3 && spec.input_channels != 4)
        throw std::invalid_argument("CnnSpec: input_channels must be 3 or 4");
    if (spec.class_count < 2) throw std::invalid_argument("CnnSpec: class_count must be >= 2");
    NetConfig cfg;
    cfg.in_channels = spec.input_channels;
    cfg.in_size = CnnSpec::input_size;
    cfg.classes = spec.class_count;
    return cfg;
}

std::size_t NetConfig::param_count() const {
    std::size_t n = 0;
    n += static_cast<std::size_t>(conv1_filters) * in_channels * 9 + conv1_filters;
    n += static_cast<std::size_t>(conv2_filters) * conv1_filters * 9 + conv2_filters;
    n += static_cast<std::size_t>(fc_width) * flat_width() + fc_width;
    n += static_cast<std::size_t>(classes) * fc_width + classes;
    return n;
}

template <typename T>
struct CnnT<T>::Workspace {
    std::int64_t n = 0;
    TensorT<T> col1, a1, p1;
    std::vector<std::int64_t> idx1;
    TensorT<T> col2, a2, p2;
    std::vector<std::int64_t> idx2;
    TensorT<T> z1;  // post-activation fc hidden
    TensorT<T> logits, probs;
};

template <typename T>
CnnT<T>::CnnT(const NetConfig& cfg) : cfg_(cfg) {
    if (cfg.in_size % 4 != 0) throw std::invalid_argument("NetConfig: in_size must be divisible by 4");
    auto alloc = [](Params& p, const NetConfig& c) {
        p.conv1_w = TensorT<T>({c.conv1_filters, c.in_channels, 3, 3});
        p.conv1_b = TensorT<T>({c.conv1_filters});
        p.conv2_w = TensorT<T>({c.conv2_filters, c.conv1_filters, 3, 3});
        p.conv2_b = TensorT<T>({c.conv2_filters});
        p.fc1_w = TensorT<T>({c.fc_width, c.flat_width()});
        p.fc1_b = TensorT<T>({c.fc_width});
        p.fc2_w = TensorT<T>({c.classes, c.fc_width});
        p.fc2_b = TensorT<T>({c.classes});
    };
    alloc(params_, cfg_);
    alloc(grads_, cfg_);
    alloc(momentum_, cfg_);
}

template <typename T>
void CnnT<T>::init_weights(std::uint64_t seed) {
    std::mt19937 rng = make_rng(seed);
    auto he_fill = [&rng](TensorT<T>& w, std::size_t fan_in) {
        const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (auto& v : w.data) v = static_cast<T>(next_gaussian(rng) * scale);
    };
    he_fill(params_.conv1_w, static_cast<std::size_t>(cfg_.in_channels) * 9);
    he_fill(params_.conv2_w, static_cast<std::size_t>(cfg_.conv1_filters) * 9);
    he_fill(params_.fc1_w, static_cast<std::size_t>(cfg_.flat_width()));
    he_fill(params_.fc2_w, static_cast<std::size_t>(cfg_.fc_width));
    std::fill(params_.conv1_b.data.begin(), params_.conv1_b.data.end(), T(0));
    std::fill(params_.conv2_b.data.begin(), params_.conv2_b.data.end(), T(0));
    std::fill(params_.fc1_b.data.begin(), params_.fc1_b.data.end(), T(0));
    std::fill(params_.fc2_b.data.begin(), params_.fc2_b.data.end(), T(0));
    for (auto [name, t] : named_grads()) std::fill(t->data.begin(), t->data.end(), T(0));
    auto zero_m = [](Params& p) {
        for (TensorT<T>* t : {&p.conv1_w, &p.conv1_b, &p.conv2_w, &p.conv2_b, &p.fc1_w, &p.fc1_b,
                              &p.fc2_w, &p.fc2_b})
            std::fill(t->data.begin(), t->data.end(), T(0));
    };
    zero_m(momentum_);
}

template <typename T>
void CnnT<T>::forward_internal(const TensorT<T>& batch, Workspace& ws) const {
    if (batch.shape.size() != 4 || batch.dim(1) != cfg_.in_channels ||
        batch.dim(2) != cfg_.in_size || batch.dim(3) != cfg_.in_size)
        throw std::invalid_argument("forward: input shape does not match network spec");
    const std::int64_t n = batch.dim(0);
    const std::int64_t s = cfg_.in_size;
    const std::int64_t s2 = s / 2;
    const std::int64_t q = s / 4;
    const std::int64_t f1 = cfg_.conv1_filters;
    const std::int64_t f2 = cfg_.conv2_filters;
    const bool relu = cfg_.activation == Activation::relu;

    ws.n = n;

    // conv1 (+ bias + activation)
    ws.col1 = TensorT<T>({static_cast<int>(n * s * s), cfg_.in_channels * 9});
    im2col3(batch.data.data(), n, cfg_.in_channels, s, ws.col1.data.data());
    TensorT<T> out1({static_cast<int>(n * s * s), static_cast<int>(f1)});
    matmul_abt(ws.col1.data.data(), params_.conv1_w.data.data(), out1.data.data(), n * s * s, f1,
               cfg_.in_channels * 9);
    ws.a1 = TensorT<T>({static_cast<int>(n), static_cast<int>(f1), static_cast<int>(s),
                        static_cast<int>(s)});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * s * s; ++i) {
        const std::int64_t sample = i / (s * s);
        const std::int64_t pix = i % (s * s);
        for (std::int64_t f = 0; f < f1; ++f) {
            T v = out1.data[i * f1 + f] + params_.conv1_b.data[f];
            if (relu && v < T(0)) v = T(0);
            ws.a1.data[(sample * f1 + f) * s * s + pix] = v;
        }
    }

    // maxpool 2x2
    ws.p1 = TensorT<T>({static_cast<int>(n), static_cast<int>(f1), static_cast<int>(s2),
                        static_cast<int>(s2)});
    ws.idx1.assign(ws.p1.numel(), 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * f1; ++i) {
        const T* src = ws.a1.data.data() + i * s * s;
        T* dst = ws.p1.data.data() + i * s2 * s2;
        std::int64_t* idx = ws.idx1.data() + i * s2 * s2;
        for (std::int64_t y = 0; y < s2; ++y) {
            for (std::int64_t x = 0; x < s2; ++x) {
                std::int64_t best = (2 * y) * s + 2 * x;
                T bv = src[best];
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        std::int64_t c = (2 * y + dy) * s + 2 * x + dx;
                        if (src[c] > bv) {
                            bv = src[c];
                            best = c;
                        }
                    }
                dst[y * s2 + x] = bv;
                idx[y * s2 + x] = i * s * s + best;
            }
        }
    }

    // conv2 (+ bias + activation)
    ws.col2 = TensorT<T>({static_cast<int>(n * s2 * s2), static_cast<int>(f1 * 9)});
    im2col3(ws.p1.data.data(), n, f1, s2, ws.col2.data.data());
    TensorT<T> out2({static_cast<int>(n * s2 * s2), static_cast<int>(f2)});
    matmul_abt(ws.col2.data.data(), params_.conv2_w.data.data(), out2.data.data(), n * s2 * s2, f2,
               f1 * 9);
    ws.a2 = TensorT<T>({static_cast<int>(n), static_cast<int>(f2), static_cast<int>(s2),
                        static_cast<int>(s2)});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * s2 * s2; ++i) {
        const std::int64_t sample = i / (s2 * s2);
        const std::int64_t pix = i % (s2 * s2);
        for (std::int64_t f = 0; f < f2; ++f) {
            T v = out2.data[i * f2 + f] + params_.conv2_b.data[f];
            if (relu && v < T(0)) v = T(0);
            ws.a2.data[(sample * f2 + f) * s2 * s2 + pix] = v;
        }
    }

    ws.p2 = TensorT<T>({static_cast<int>(n), static_cast<int>(f2), static_cast<int>(q),
                        static_cast<int>(q)});
    ws.idx2.assign(ws.p2.numel(), 0);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * f2; ++i) {
        const T* src = ws.a2.data.data() + i * s2 * s2;
        T* dst = ws.p2.data.data() + i * q * q;
        std::int64_t* idx = ws.idx2.data() + i * q * q;
        for (std::int64_t y = 0; y < q; ++y) {
            for (std::int64_t x = 0; x < q; ++x) {
                std::int64_t best = (2 * y) * s2 + 2 * x;
                T bv = src[best];
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        std::int64_t c = (2 * y + dy) * s2 + 2 * x + dx;
                        if (src[c] > bv) {
                            bv = src[c];
                            best = c;
                        }
                    }
                dst[y * q + x] = bv;
                idx[y * q + x] = i * s2 * s2 + best;
            }
        }
    }

    // fc1 (+ activation), fc2
    const std::int64_t flat = cfg_.flat_width();
    ws.z1 = TensorT<T>({static_cast<int>(n), cfg_.fc_width});
    matmul_abt(ws.p2.data.data(), params_.fc1_w.data.data(), ws.z1.data.data(), n, cfg_.fc_width,
               flat);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = 0; j < cfg_.fc_width; ++j) {
            T v = ws.z1.data[i * cfg_.fc_width + j] + params_.fc1_b.data[j];
            if (relu && v < T(0)) v = T(0);
            ws.z1.data[i * cfg_.fc_width + j] = v;
        }
    }

    ws.logits = TensorT<T>({static_cast<int>(n), cfg_.classes});
    matmul_abt(ws.z1.data.data(), params_.fc2_w.data.data(), ws.logits.data.data(), n, cfg_.classes,
               cfg_.fc_width);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < cfg_.classes; ++j)
            ws.logits.data[i * cfg_.classes + j] += params_.fc2_b.data[j];

    ws.probs = ws.logits;
    for (std::int64_t i = 0; i < n; ++i) {
        T* row = ws.probs.data.data() + i * cfg_.classes;
        T m = row[0];
        for (std::int64_t j = 1; j < cfg_.classes; ++j) m = std::max(m, row[j]);
        T sum = 0;
        for (std::int64_t j = 0; j < cfg_.classes; ++j) {
            row[j] = std::exp(row[j] - m);
            sum += row[j];
        }
        for (std::int64_t j = 0; j < cfg_.classes; ++j) row[j] /= sum;
    }
}

template <typename T>
void CnnT<T>::backward_internal(const TensorT<T>& batch, Workspace& ws, const TensorT<T>& dlogits,
                                Params& grads, TensorT<T>* input_grad) const {
    const std::int64_t n = ws.n;
    const std::int64_t s = cfg_.in_size;
    const std::int64_t s2 = s / 2;
    const std::int64_t q = s / 4;
    const std::int64_t f1 = cfg_.conv1_filters;
    const std::int64_t f2 = cfg_.conv2_filters;
    const std::int64_t flat = cfg_.flat_width();
    const bool relu = cfg_.activation == Activation::relu;

    // fc2
    matmul_atb(dlogits.data.data(), ws.z1.data.data(), grads.fc2_w.data.data(), n, cfg_.classes,
               cfg_.fc_width);
    std::fill(grads.fc2_b.data.begin(), grads.fc2_b.data.end(), T(0));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < cfg_.classes; ++j)
            grads.fc2_b.data[j] += dlogits.data[i * cfg_.classes + j];

    TensorT<T> dz1({static_cast<int>(n), cfg_.fc_width});
    matmul_ab(dlogits.data.data(), params_.fc2_w.data.data(), dz1.data.data(), n, cfg_.classes,
              cfg_.fc_width);
    if (relu) {
        for (std::size_t i = 0; i < dz1.numel(); ++i)
            if (ws.z1.data[i] <= T(0)) dz1.data[i] = T(0);
    }

    // fc1
    matmul_atb(dz1.data.data(), ws.p2.data.data(), grads.fc1_w.data.data(), n, cfg_.fc_width, flat);
    std::fill(grads.fc1_b.data.begin(), grads.fc1_b.data.end(), T(0));
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < cfg_.fc_width; ++j)
            grads.fc1_b.data[j] += dz1.data[i * cfg_.fc_width + j];

    TensorT<T> dp2({static_cast<int>(n), static_cast<int>(flat)});
    matmul_ab(dz1.data.data(), params_.fc1_w.data.data(), dp2.data.data(), n, cfg_.fc_width, flat);

    // unpool 2 + activation mask
    TensorT<T> da2({static_cast<int>(n), static_cast<int>(f2), static_cast<int>(s2),
                    static_cast<int>(s2)});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        T* da = da2.data.data() + i * f2 * s2 * s2;
        std::fill(da, da + f2 * s2 * s2, T(0));
        for (std::int64_t j = 0; j < f2 * q * q; ++j) {
            const std::int64_t flat_idx = i * f2 * q * q + j;
            da2.data[ws.idx2[flat_idx]] += dp2.data[flat_idx];
        }
    }
    if (relu) {
        for (std::size_t i = 0; i < da2.numel(); ++i)
            if (ws.a2.data[i] <= T(0)) da2.data[i] = T(0);
    }

    // conv2: reorder da2 (NCHW) to row-major (rows = sample*pixel, cols = filter)
    TensorT<T> dy2({static_cast<int>(n * s2 * s2), static_cast<int>(f2)});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * s2 * s2; ++i) {
        const std::int64_t sample = i / (s2 * s2);
        const std::int64_t pix = i % (s2 * s2);
        for (std::int64_t f = 0; f < f2; ++f)
            dy2.data[i * f2 + f] = da2.data[(sample * f2 + f) * s2 * s2 + pix];
    }
    matmul_atb(dy2.data.data(), ws.col2.data.data(), grads.conv2_w.data.data(), n * s2 * s2, f2,
               f1 * 9);
    std::fill(grads.conv2_b.data.begin(), grads.conv2_b.data.end(), T(0));
    for (std::int64_t i = 0; i < n * s2 * s2; ++i)
        for (std::int64_t f = 0; f < f2; ++f) grads.conv2_b.data[f] += dy2.data[i * f2 + f];

    TensorT<T> dcol2({static_cast<int>(n * s2 * s2), static_cast<int>(f1 * 9)});
    matmul_ab(dy2.data.data(), params_.conv2_w.data.data(), dcol2.data.data(), n * s2 * s2, f2,
              f1 * 9);
    TensorT<T> dp1({static_cast<int>(n), static_cast<int>(f1), static_cast<int>(s2),
                    static_cast<int>(s2)});
    col2im3(dcol2.data.data(), n, f1, s2, dp1.data.data());

    // unpool 1 + activation mask
    TensorT<T> da1({static_cast<int>(n), static_cast<int>(f1), static_cast<int>(s),
                    static_cast<int>(s)});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        T* da = da1.data.data() + i * f1 * s * s;
        std::fill(da, da + f1 * s * s, T(0));
        for (std::int64_t j = 0; j < f1 * s2 * s2; ++j) {
            const std::int64_t flat_idx = i * f1 * s2 * s2 + j;
            da1.data[ws.idx1[flat_idx]] += dp1.data[flat_idx];
        }
    }
    if (relu) {
        for (std::size_t i = 0; i < da1.numel(); ++i)
            if (ws.a1.data[i] <= T(0)) da1.data[i] = T(0);
    }

    // conv1
    TensorT<T> dy1({static_cast<int>(n * s * s), static_cast<int>(f1)});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * s * s; ++i) {
        const std::int64_t sample = i / (s * s);
        const std::int64_t pix = i % (s * s);
        for (std::int64_t f = 0; f < f1; ++f)
            dy1.data[i * f1 + f] = da1.data[(sample * f1 + f) * s * s + pix];
    }
    matmul_atb(dy1.data.data(), ws.col1.data.data(), grads.conv1_w.data.data(), n * s * s, f1,
               cfg_.in_channels * 9);
    std::fill(grads.conv1_b.data.begin(), grads.conv1_b.data.end(), T(0));
    for (std::int64_t i = 0; i < n * s * s; ++i)
        for (std::int64_t f = 0; f < f1; ++f) grads.conv1_b.data[f] += dy1.data[i * f1 + f];

    if (input_grad != nullptr) {
        TensorT<T> dcol1({static_cast<int>(n * s * s), cfg_.in_channels * 9});
        matmul_ab(dy1.data.data(), params_.conv1_w.data.data(), dcol1.data.data(), n * s * s, f1,
                  cfg_.in_channels * 9);
        *input_grad = TensorT<T>(batch.shape);
        col2im3(dcol1.data.data(), n, cfg_.in_channels, s, input_grad->data.data());
    }
}

template <typename T>
TensorT<T> CnnT<T>::probabilities(const TensorT<T>& batch) const {
    Workspace ws;
    forward_internal(batch, ws);
    return ws.probs;
}

template <typename T>
TensorT<T> CnnT<T>::logits(const TensorT<T>& batch) const {
    Workspace ws;
    forward_internal(batch, ws);
    return ws.logits;
}

template <typename T>
T CnnT<T>::loss(const TensorT<T>& batch, const std::vector<int>& labels) const {
    Workspace ws;
    forward_internal(batch, ws);
    const std::int64_t n = ws.n;
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double p = ws.probs.data[i * cfg_.classes + labels[static_cast<std::size_t>(i)]];
        total += -std::log(std::max(p, 1e-12));
    }
    return static_cast<T>(total / static_cast<double>(n));
}

template <typename T>
T CnnT<T>::forward_backward(const TensorT<T>& batch, const std::vector<int>& labels,
                            TensorT<T>* input_grad, std::size_t* correct_count) {
    Workspace ws;
    forward_internal(batch, ws);
    const std::int64_t n = ws.n;

    TensorT<T> dlogits({static_cast<int>(n), cfg_.classes});
    double total = 0.0;
    std::size_t correct = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        const T* row = ws.probs.data.data() + i * cfg_.classes;
        int argmax = 0;
        for (std::int64_t j = 0; j < cfg_.classes; ++j) {
            dlogits.data[i * cfg_.classes + j] = (row[j] - (j == y ? T(1) : T(0))) / static_cast<T>(n);
            if (row[j] > row[argmax]) argmax = static_cast<int>(j);
        }
        if (argmax == y) ++correct;
        total += -std::log(std::max(static_cast<double>(row[y]), 1e-12));
    }
    if (correct_count != nullptr) *correct_count = correct;
    backward_internal(batch, ws, dlogits, grads_, input_grad);
    return static_cast<T>(total / static_cast<double>(n));
}

template <typename T>
void CnnT<T>::sgd_step(T lr, T momentum) {
    auto step = [lr, momentum](TensorT<T>& w, const TensorT<T>& g, TensorT<T>& v) {
        for (std::size_t i = 0; i < w.numel(); ++i) {
            v.data[i] = momentum * v.data[i] + g.data[i];
            w.data[i] -= lr * v.data[i];
        }
    };
    step(params_.conv1_w, grads_.conv1_w, momentum_.conv1_w);
    step(params_.conv1_b, grads_.conv1_b, momentum_.conv1_b);
    step(params_.conv2_w, grads_.conv2_w, momentum_.conv2_w);
    step(params_.conv2_b, grads_.conv2_b, momentum_.conv2_b);
    step(params_.fc1_w, grads_.fc1_w, momentum_.fc1_w);
    step(params_.fc1_b, grads_.fc1_b, momentum_.fc1_b);
    step(params_.fc2_w, grads_.fc2_w, momentum_.fc2_w);
    step(params_.fc2_b, grads_.fc2_b, momentum_.fc2_b);
}

template <typename T>
TensorT<T> CnnT<T>::loss_input_gradient(const TensorT<T>& single, int label) const {
    Workspace ws;
    forward_internal(single, ws);
    const std::int64_t n = ws.n;
    TensorT<T> dlogits({static_cast<int>(n), cfg_.classes});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < cfg_.classes; ++j)
            dlogits.data[i * cfg_.classes + j] =
                (ws.probs.data[i * cfg_.classes + j] - (j == label ? T(1) : T(0))) /
                static_cast<T>(n);
    Params scratch = grads_;
    TensorT<T> dinput;
    backward_internal(single, ws, dlogits, scratch, &dinput);
    return dinput;
}

template <typename T>
TensorT<T> CnnT<T>::logit_input_gradient(const TensorT<T>& single, int class_id) const {
    Workspace ws;
    forward_internal(single, ws);
    const std::int64_t n = ws.n;
    TensorT<T> dlogits({static_cast<int>(n), cfg_.classes});
    for (std::int64_t i = 0; i < n; ++i) dlogits.data[i * cfg_.classes + class_id] = T(1);
    Params scratch = grads_;
    TensorT<T> dinput;
    backward_internal(single, ws, dlogits, scratch, &dinput);
    return dinput;
}

template <typename T>
std::vector<std::pair<std::string, TensorT<T>*>> CnnT<T>::named_params() {
    return {{"conv1.weight", &params_.conv1_w}, {"conv1.bias", &params_.conv1_b},
            {"conv2.weight", &params_.conv2_w}, {"conv2.bias", &params_.conv2_b},
            {"fc1.weight", &params_.fc1_w},     {"fc1.bias", &params_.fc1_b},
            {"fc2.weight", &params_.fc2_w},     {"fc2.bias", &params_.fc2_b}};
}

template <typename T>
std::vector<std::pair<std::string, const TensorT<T>*>> CnnT<T>::named_params() const {
    return {{"conv1.weight", &params_.conv1_w}, {"conv1.bias", &params_.conv1_b},
            {"conv2.weight", &params_.conv2_w}, {"conv2.bias", &params_.conv2_b},
            {"fc1.weight", &params_.fc1_w},     {"fc1.bias", &params_.fc1_b},
            {"fc2.weight", &params_.fc2_w},     {"fc2.bias", &params_.fc2_b}};
}

template <typename T>
std::vector<std::pair<std::string, TensorT<T>*>> CnnT<T>::named_grads() {
    return {{"conv1.weight", &grads_.conv1_w}, {"conv1.bias", &grads_.conv1_b},
            {"conv2.weight", &grads_.conv2_w}, {"conv2.bias", &grads_.conv2_b},
            {"fc1.weight", &grads_.fc1_w},     {"fc1.bias", &grads_.fc1_b},
            {"fc2.weight", &grads_.fc2_w},     {"fc2.bias", &grads_.fc2_b}};
}

template class CnnT<float>;
template class CnnT<double>;

TensorF to_input_tensor(const std::vector<FourChannelImage>& images,
                        const std::vector<std::size_t>& indices, int channels) {
    if (indices.empty()) throw std::invalid_argument("to_input_tensor: empty batch");
    const int w = images[indices[0]].width;
    const int h = images[indices[0]].height;
    TensorF out({static_cast<int>(indices.size()), channels, h, w});
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const FourChannelImage& img = images[indices[b]];
        for (int c = 0; c < channels; ++c) {
            const float* src = img.data.data() + static_cast<std::size_t>(c) * plane;
            float* dst = out.data.data() + (b * channels + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] / 255.0f;
        }
    }
    return out;
}

Checkpoint train(const std::vector<FourChannelImage>& images, const std::vector<int>& labels,
                 const CnnSpec& spec, const TrainHyper& hyper) {
    if (images.empty()) throw std::invalid_argument("train: empty dataset");
    if (labels.size() != images.size()) throw std::invalid_argument("train: label count mismatch");
    for (int y : labels)
        if (y < 0 || y >= spec.class_count) throw std::out_of_range("train: label out of range");

    if (hyper.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

    Cnn net(NetConfig::from_spec(spec));
    net.init_weights(hyper.seed);

    std::mt19937 shuffle_rng = make_rng(mix_seed(hyper.seed, 0x5eedu));
    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainMeta meta;
    meta.epochs = hyper.epochs;
    meta.seed = hyper.seed;

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        // Fisher-Yates with raw modulo draw: portable across standard libraries.
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::size_t j = shuffle_rng() % (i + 1);
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(hyper.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(hyper.batch_size));
            std::vector<std::size_t> batch_idx(order.begin() + start, order.begin() + end);
            TensorF batch = to_input_tensor(images, batch_idx, spec.input_channels);
            std::vector<int> batch_labels(batch_idx.size());
            for (std::size_t i = 0; i < batch_idx.size(); ++i)
                batch_labels[i] = labels[batch_idx[i]];
            std::size_t batch_correct = 0;
            float l = net.forward_backward(batch, batch_labels, nullptr, &batch_correct);
            epoch_loss += static_cast<double>(l) * static_cast<double>(batch_idx.size());
            correct += batch_correct;
            net.sgd_step(static_cast<float>(hyper.learning_rate),
                         static_cast<float>(hyper.momentum));
        }
        meta.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
        meta.accuracy_history.push_back(static_cast<double>(correct) /
                                        static_cast<double>(order.size()));
    }

    return snapshot(net, spec, meta);
}

Cnn make_net(const Checkpoint& ckpt) {
    Cnn net(NetConfig::from_spec(ckpt.spec));
    auto refs = net.named_params();
    if (refs.size() != ckpt.weights.size())
        throw std::runtime_error("checkpoint: tensor count mismatch");
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (refs[i].first != ckpt.weights[i].first)
            throw std::runtime_error("checkpoint: unexpected tensor " + ckpt.weights[i].first);
        if (refs[i].second->shape != ckpt.weights[i].second.shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + ckpt.weights[i].first);
        *refs[i].second = ckpt.weights[i].second;
    }
    return net;
}

Checkpoint snapshot(const Cnn& net, const CnnSpec& spec, TrainMeta meta) {
    Checkpoint ckpt;
    ckpt.spec = spec;
    ckpt.meta = std::move(meta);
    for (auto [name, tensor] : net.named_params()) ckpt.weights.emplace_back(name, *tensor);
    return ckpt;
}

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr char kCkptMagic[8] = {'S', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json header;
    header["format_version"] = 1;
    header["spec"] = {{"input_channels", ckpt.spec.input_channels},
                      {"class_count", ckpt.spec.class_count},
                      {"input_size", CnnSpec::input_size}};
    header["meta"] = {{"epochs", ckpt.meta.epochs},
                      {"seed", ckpt.meta.seed},
                      {"loss_history", ckpt.meta.loss_history},
                      {"accuracy_history", ckpt.meta.accuracy_history}};
    json tensors = json::array();
    std::size_t offset = 0;
    for (const auto& [name, t] : ckpt.weights) {
        tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset},
                           {"count", t.numel()}});
        offset += t.numel();
    }
    header["tensors"] = tensors;
    const std::string hs = header.dump();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kCkptMagic, 8);
    write_u32(os, 1);
    write_u32(os, static_cast<std::uint32_t>(hs.size()));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : ckpt.weights) {
        for (float v : t.data) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            write_u32(os, bits);
        }
    }
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    std::uint32_t version = read_u32(is);
    if (version != 1) throw std::runtime_error("load_checkpoint: unsupported version");
    std::uint32_t hlen = read_u32(is);
    std::string hs(hlen, '\0');
    is.read(hs.data(), hlen);
    json header = json::parse(hs);

    Checkpoint ckpt;
    ckpt.spec.input_channels = header.at("spec").at("input_channels").get<int>();
    ckpt.spec.class_count = header.at("spec").at("class_count").get<int>();
    ckpt.meta.epochs = header.at("meta").at("epochs").get<int>();
    ckpt.meta.seed = header.at("meta").at("seed").get<std::uint64_t>();
    ckpt.meta.loss_history = header.at("meta").at("loss_history").get<std::vector<double>>();
    ckpt.meta.accuracy_history =
        header.at("meta").at("accuracy_history").get<std::vector<double>>();

    for (const auto& entry : header.at("tensors")) {
        TensorF t(entry.at("shape").get<std::vector<int>>());
        if (t.numel() != entry.at("count").get<std::size_t>())
            throw std::runtime_error("load_checkpoint: tensor size mismatch");
        for (auto& v : t.data) {
            std::uint32_t bits = read_u32(is);
            std::memcpy(&v, &bits, 4);
        }
        ckpt.weights.emplace_back(entry.at("name").get<std::string>(), std::move(t));
    }
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return ckpt;
}

Checkpoint adapt_first_layer(const Checkpoint& ckpt) {
    if (ckpt.spec.input_channels != 3)
        throw std::invalid_argument("adapt_first_layer: checkpoint is not 3-channel");
    Checkpoint out = ckpt;
    out.spec.input_channels = 4;
    for (auto& [name, t] : out.weights) {
        if (name != "conv1.weight") continue;
        const int f = t.dim(0);
        TensorF grown({f, 4, 3, 3});
        for (int i = 0; i < f; ++i) {
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    float mean = 0.0f;
                    for (int c = 0; c < 3; ++c) {
                        float v = t.data[((static_cast<std::size_t>(i) * 3 + c) * 3 + ky) * 3 + kx];
                        grown.data[((static_cast<std::size_t>(i) * 4 + c) * 3 + ky) * 3 + kx] = v;
                        mean += v;
                    }
                    grown.data[((static_cast<std::size_t>(i) * 4 + 3) * 3 + ky) * 3 + kx] =
                        mean / 3.0f;
                }
            }
        }
        t = std::move(grown);
    }
    return out;
}

double gradient_check(CnnT<double>& net, const TensorD& batch, const std::vector<int>& labels,
                      int num_checks, std::uint64_t seed, int tamper_index) {
    net.forward_backward(batch, labels);

    struct Slot {
        TensorD* param;
        TensorD* grad;
        std::size_t index;
    };
    std::vector<Slot> slots;
    auto params = net.named_params();
    auto grads = net.named_grads();
    for (std::size_t t = 0; t < params.size(); ++t) {
        for (std::size_t i = 0; i < params[t].second->numel(); ++i)
            slots.push_back(Slot{params[t].second, grads[t].second, i});
    }

    std::mt19937 rng = make_rng(mix_seed(seed, 0xc4ec));
    const std::size_t n_checks = std::min<std::size_t>(slots.size(), static_cast<std::size_t>(num_checks));
    // partial Fisher-Yates: the first n_checks entries become the sample
    for (std::size_t i = 0; i < n_checks; ++i) {
        std::size_t j = i + rng() % (slots.size() - i);
        std::swap(slots[i], slots[j]);
    }

    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < n_checks; ++i) {
        double analytic = slots[i].grad->data[slots[i].index];
        if (static_cast<int>(i) == tamper_index) analytic = analytic * 10.0 + 1.0;
        double& w = slots[i].param->data[slots[i].index];
        const double orig = w;
        w = orig + h;
        double lp = net.loss(batch, labels);
        w = orig - h;
        double lm = net.loss(batch, labels);
        w = orig;
        const double numeric = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
    return max_rel;
}

CnnClassifier::CnnClassifier(const Checkpoint& ckpt) : net_(make_net(ckpt)) {}

std::vector<double> CnnClassifier::probabilities_of(const TensorF& single) const {
    TensorF probs = net_.probabilities(single);
    std::vector<double> out(probs.data.begin(), probs.data.begin() + net_.config().classes);
    return out;
}

TensorF CnnClassifier::loss_input_gradient(const TensorF& single, int label) const {
    return net_.loss_input_gradient(single, label);
}

TensorF CnnClassifier::logit_input_gradient(const TensorF& single, int class_id) const {
    return net_.logit_input_gradient(single, class_id);
}

}  // namespace shadowlab
