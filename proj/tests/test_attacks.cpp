#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shadowlab/attacks.hpp"
#include "support/oracles.hpp"

using namespace shadowlab;
using shadowlab::testing::LinearSoftmaxClassifier;

namespace {

FourChannelImage random_example(std::mt19937& rng, const ProfileConfig& profile, int size = 32) {
    RgbImage rgb = testing::random_rgb(rng, size, size);
    FourChannelImage out(size, size);
    ProfileMap p = make_profile(rgb, profile);
    const std::size_t plane = out.plane_size();
    for (std::size_t i = 0; i < plane; ++i) {
        out.data[i] = rgb.data[i * 3];
        out.data[plane + i] = rgb.data[i * 3 + 1];
        out.data[2 * plane + i] = rgb.data[i * 3 + 2];
        out.data[3 * plane + i] = p.data[i];
    }
    return out;
}

LinearSoftmaxClassifier seeded_linear(std::mt19937& rng, int classes, int size = 32,
                                      bool rgb_only = true) {
    LinearSoftmaxClassifier model(4, size, classes);
    std::uniform_real_distribution<float> d(-0.1f, 0.1f);
    const std::size_t plane = static_cast<std::size_t>(size) * size;
    for (int c = 0; c < classes; ++c)
        for (int ch = 0; ch < 4; ++ch) {
            if (rgb_only && ch == 3) continue;
            for (std::size_t i = 0; i < plane; ++i)
                model.weights()[(static_cast<std::size_t>(c) * 4 + ch) * plane + i] = d(rng);
        }
    return model;
}

double max_rgb_delta(const FourChannelImage& a, const FourChannelImage& b) {
    double best = 0.0;
    for (std::size_t i = 0; i < 3 * a.plane_size(); ++i)
        best = std::max(best, std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    return best;
}

}  // namespace

TEST_CASE("fgsm with epsilon zero is the identity") {
    std::mt19937 rng(1);
    ProfileConfig profile;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model = seeded_linear(rng, 3);
    FourChannelImage out = fgsm(model, img, 0, EpsBudget{0.0}, profile);
    CHECK(out == img);
}

TEST_CASE("fgsm perturbation is epsilon times the loss-gradient sign") {
    std::mt19937 rng(2);
    ProfileConfig profile;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model = seeded_linear(rng, 3);

    const double eps = 0.05;  // 255*eps = 12.75, exactly representable
    FourChannelImage out = fgsm(model, img, 1, EpsBudget{eps}, profile);

    TensorF x({1, 4, 32, 32});
    for (std::size_t i = 0; i < img.data.size(); ++i) x.data[i] = img.data[i] / 255.0f;
    TensorF g = model.loss_input_gradient(x, 1);

    const std::size_t plane = img.plane_size();
    for (std::size_t i = 0; i < 3 * plane; ++i) {
        const double s = g.data[i] > 0 ? 1.0 : (g.data[i] < 0 ? -1.0 : 0.0);
        const double expect =
            std::clamp(static_cast<double>(img.data[i]) + 255.0 * eps * s, 0.0, 255.0);
        REQUIRE(out.data[i] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("fgsm and pgd stay inside the epsilon ball exactly") {
    std::mt19937 rng(3);
    ProfileConfig profile;
    profile.kind = ProfileKind::edges;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model = seeded_linear(rng, 4);
    const double eps = 0.05;

    FourChannelImage f = fgsm(model, img, 2, EpsBudget{eps}, profile);
    CHECK(max_rgb_delta(f, img) <= 255.0 * eps);

    FourChannelImage p = pgd(model, img, 2, EpsBudget{eps}, 10, eps / 4, true, 77, profile);
    CHECK(max_rgb_delta(p, img) <= 255.0 * eps);
}

TEST_CASE("single-step pgd without random start equals fgsm bit-exactly") {
    std::mt19937 rng(4);
    ProfileConfig profile;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model = seeded_linear(rng, 3);
    const double eps = 0.04;
    FourChannelImage a = fgsm(model, img, 0, EpsBudget{eps}, profile);
    FourChannelImage b = pgd(model, img, 0, EpsBudget{eps}, 1, eps, false, 0, profile);
    CHECK(a == b);
}

TEST_CASE("attacks never touch the profile plane directly; it is recomputed") {
    std::mt19937 rng(5);
    for (auto kind : {ProfileKind::adathresh, ProfileKind::edges}) {
        ProfileConfig profile;
        profile.kind = kind;
        FourChannelImage img = random_example(rng, profile);
        LinearSoftmaxClassifier model = seeded_linear(rng, 3);
        FourChannelImage out = pgd(model, img, 1, EpsBudget{0.1}, 4, 0.03, false, 0, profile);

        RgbImage quantized(out.width, out.height);
        const std::size_t plane = out.plane_size();
        for (std::size_t i = 0; i < plane; ++i)
            for (int c = 0; c < 3; ++c)
                quantized.data[i * 3 + c] = static_cast<std::uint8_t>(
                    std::clamp(round_half_away(out.data[c * plane + i]), 0, 255));
        ProfileMap expect = make_profile(quantized, profile);
        for (std::size_t i = 0; i < plane; ++i)
            REQUIRE(out.data[3 * plane + i] == static_cast<float>(expect.data[i]));
    }
}

TEST_CASE("zero gradient leaves the input unchanged") {
    std::mt19937 rng(6);
    ProfileConfig profile;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model(4, 32, 3);  // all-zero weights -> zero gradient
    FourChannelImage out = fgsm(model, img, 0, EpsBudget{0.2}, profile);
    CHECK(out == img);
}

TEST_CASE("pgd loss is non-decreasing on a convex linear toy model") {
    std::mt19937 rng(7);
    ProfileConfig profile;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model = seeded_linear(rng, 2);  // binary, RGB-only weights

    auto loss_of = [&](const FourChannelImage& x) {
        TensorF t({1, 4, 32, 32});
        for (std::size_t i = 0; i < x.data.size(); ++i) t.data[i] = x.data[i] / 255.0f;
        return -std::log(std::max(model.probabilities_of(t)[0], 1e-12));
    };

    double prev = loss_of(img);
    FourChannelImage cur = img;
    for (int step = 0; step < 6; ++step) {
        cur = pgd(model, cur, 0, EpsBudget{0.3}, 1, 0.02, false, 0, profile);
        const double now = loss_of(cur);
        CHECK(now >= prev - 1e-9);
        prev = now;
    }
}

TEST_CASE("default epsilon derives from the k=0.43 bound") {
    CHECK(default_epsilon() ==
          doctest::Approx(epsilon_bound(0.43, NormOrder::linf) / 255.0).epsilon(1e-12));
}

TEST_CASE("attacks validate their arguments") {
    std::mt19937 rng(8);
    ProfileConfig profile;
    FourChannelImage img = random_example(rng, profile);
    LinearSoftmaxClassifier model = seeded_linear(rng, 3);
    CHECK_THROWS_AS(pgd(model, img, 0, EpsBudget{0.1}, 0, 0.1, false, 0, profile),
                    std::invalid_argument);
    LinearSoftmaxClassifier three(3, 32, 3);
    CHECK_THROWS_AS(fgsm(three, img, 0, EpsBudget{0.1}, profile), std::invalid_argument);
}
