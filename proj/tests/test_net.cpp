#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "veil/core/common.hpp"
#include "veil/net/adam.hpp"
#include "veil/net/checkpoint.hpp"
#include "veil/net/discriminator.hpp"
#include "veil/net/generator.hpp"
#include "veil/net/loss.hpp"

using namespace veil;
using namespace veil::net;

namespace {

Tensor random_tensor(Rng& rng, int c, int h, int w, double lo = 0.0, double hi = 1.0) {
    Tensor t = Tensor::create(c, h, w);
    for (double& x : t.data) x = rng.uniform(lo, hi);
    return t;
}

std::vector<Tensor> const_scores(double value, int n_scales = 2, int hw = 6) {
    std::vector<Tensor> s;
    for (int i = 0; i < n_scales; ++i) s.push_back(Tensor::create(1, hw, hw, value));
    return s;
}

}  // namespace

TEST_CASE("generator output lies in [0,1], keeps the extent, and is deterministic") {
    Rng rng(1);
    Generator g({8, 1}, 7);
    const Tensor x = random_tensor(rng, 3, 32, 32);
    const Tensor y1 = g.forward(x);
    CHECK(y1.c == 3);
    CHECK(y1.h == 32);
    CHECK(y1.w == 32);
    for (double v : y1.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const Tensor y2 = g.forward(x);
    CHECK(y1.data == y2.data);
}

TEST_CASE("generator rejects extents below 32 px") {
    Rng rng(2);
    Generator g({8, 1}, 7);
    const Tensor x = random_tensor(rng, 3, 16, 16);
    CHECK_THROWS_AS(g.forward(x), ContractError);
}

TEST_CASE("Eq-style zero cases of the LSGAN losses hold exactly") {
    CHECK(lsgan_gen_loss(const_scores(1.0)) == 0.0);
    CHECK(lsgan_disc_loss(const_scores(0.0), const_scores(1.0)) == 0.0);
    CHECK(lsgan_gen_loss(const_scores(0.5)) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lsgan_disc_loss(const_scores(0.5), const_scores(0.5)) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lsgan_gen_loss(const_scores(0.2)) >= 0.0);
}

TEST_CASE("discriminator loss gradients match finite differences") {
    Rng rng(3);
    Discriminator d({4, 2}, 11);
    const Tensor x = random_tensor(rng, 3, 16, 16);
    const Tensor y = random_tensor(rng, 3, 16, 16);

    auto loss_fn = [&]() {
        const auto fake = d.forward(x);
        const auto real = d.forward(y);
        return lsgan_disc_loss(fake, real);
    };

    // Analytic: backward through fake and real terms separately.
    d.zero_grads();
    const auto fake = d.forward(x);
    d.backward_params(lsgan_disc_fake_grad(fake));
    const auto real = d.forward(y);
    d.backward_params(lsgan_disc_real_grad(real));

    std::vector<double> analytic;
    std::vector<ParamBlob> blobs = d.params();
    Rng pick(5);
    const double eps = 1e-6;
    int checked = 0;
    for (auto& b : blobs) {
        for (int trial = 0; trial < 2; ++trial) {
            const size_t i = static_cast<size_t>(pick.uniform() * b.value->size());
            const double keep = (*b.value)[i];
            (*b.value)[i] = keep + eps;
            const double lp = loss_fn();
            (*b.value)[i] = keep - eps;
            const double ln = loss_fn();
            (*b.value)[i] = keep;
            const double fd = (lp - ln) / (2 * eps);
            const double an = (*b.grad)[i];
            if (std::abs(fd) > 1e-7)
                CHECK(std::abs(an - fd) / std::max(std::abs(fd), 1e-7) < 1e-3);
            ++checked;
        }
    }
    CHECK(checked >= 16);
}

TEST_CASE("discriminator input gradient matches finite differences") {
    Rng rng(4);
    Discriminator d({4, 2}, 13);
    Tensor x = random_tensor(rng, 3, 16, 16);

    auto loss_fn = [&](const Tensor& in) { return lsgan_gen_loss(d.forward(in)); };

    const auto scores = d.forward(x);
    const Tensor gx = d.backward_input(lsgan_gen_loss_grad(scores));
    REQUIRE(gx.c == 3);
    REQUIRE(gx.h == 16);

    // Directional probes; single-element probes can straddle LeakyRelu kinks.
    Rng pick(6);
    const double eps = 1e-6;
    for (int trial = 0; trial < 4; ++trial) {
        Tensor dir = random_tensor(pick, 3, 16, 16, -1.0, 1.0);
        Tensor xp = x, xn = x;
        for (size_t i = 0; i < x.data.size(); ++i) {
            xp.data[i] += eps * dir.data[i];
            xn.data[i] -= eps * dir.data[i];
        }
        const double fd = (loss_fn(xp) - loss_fn(xn)) / (2 * eps);
        double an = 0.0;
        for (size_t i = 0; i < x.data.size(); ++i) an += gx.data[i] * dir.data[i];
        CHECK(std::abs(an - fd) / std::max(std::abs(fd), 1e-8) < 1e-3);
    }
}

TEST_CASE("generator parameter gradients match finite differences") {
    Rng rng(7);
    Generator g({6, 1}, 17);
    const Tensor x = random_tensor(rng, 3, 32, 32);
    Tensor w = random_tensor(rng, 3, 32, 32, -1.0, 1.0);

    auto loss_fn = [&]() {
        const Tensor y = g.forward(x);
        double acc = 0.0;
        for (size_t i = 0; i < y.size(); ++i) acc += y.data[i] * w.data[i];
        return acc;
    };

    g.zero_grads();
    g.forward(x);
    g.backward(w);

    Rng pick(9);
    const double eps = 1e-6;
    int strict = 0;
    for (auto& b : g.params()) {
        const size_t i = static_cast<size_t>(pick.uniform() * b.value->size());
        const double keep = (*b.value)[i];
        (*b.value)[i] = keep + eps;
        const double lp = loss_fn();
        (*b.value)[i] = keep - eps;
        const double ln = loss_fn();
        (*b.value)[i] = keep;
        const double fd = (lp - ln) / (2 * eps);
        if (std::abs(fd) > 1e-6) {
            CHECK(std::abs((*b.grad)[i] - fd) / std::max(std::abs(fd), 1e-6) < 1e-3);
            ++strict;
        }
    }
    CHECK(strict >= 10);
}

TEST_CASE("reading activations does not perturb the score maps") {
    Rng rng(10);
    Discriminator d({4, 2}, 19);
    const Tensor x = random_tensor(rng, 3, 16, 16);
    const auto s1 = d.forward(x);
    REQUIRE_FALSE(d.layer_registry().empty());
    for (const auto& layer : d.layer_registry()) {
        (void)d.activation(layer);
        (void)d.score_gradient_at(layer, -1.0);
    }
    const auto s2 = d.forward(x);
    REQUIRE(s1.size() == s2.size());
    for (size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].data == s2[i].data);
}

TEST_CASE("unknown layer ids raise a registry error") {
    Discriminator d({4, 2}, 23);
    CHECK_THROWS_AS(d.activation("s9.l1"), RangeError);
}

TEST_CASE("checkpoint round-trips parameters and optimizer state") {
    Rng rng(12);
    Generator g({6, 1}, 29);
    Discriminator d({4, 2}, 31);
    Adam opt(1e-3);

    // one optimizer step so the moments are non-trivial
    g.zero_grads();
    g.forward(random_tensor(rng, 3, 32, 32));
    g.backward(random_tensor(rng, 3, 32, 32, -1.0, 1.0));
    opt.step(g.params());

    Checkpoint ck;
    ck.stage = "stage1";
    ck.config_hash = "deadbeef";
    store_generator(ck, g);
    store_discriminator(ck, d);
    store_adam(ck, "adam.g", opt);

    const auto dir = std::filesystem::temp_directory_path() / "veil_net_tests";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "ck.bin").string();
    ck.save(path);

    const Checkpoint back = Checkpoint::load(path);
    CHECK(back.stage == "stage1");
    CHECK(back.config_hash == "deadbeef");
    Generator g2 = load_generator(back);
    Discriminator d2 = load_discriminator(back);
    CHECK(g2.param_hash() == g.param_hash());
    CHECK(d2.param_hash() == d.param_hash());
    Adam opt2(1e-3);
    load_adam(back, "adam.g", opt2);
    CHECK(opt2.t() == opt.t());

    // byte-deterministic writes
    const std::string path2 = (dir / "ck2.bin").string();
    back.save(path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
}

TEST_CASE("identity pretraining drives per-pixel L1 below 0.05") {
    Rng rng(14);
    Generator g({8, 1}, 37);
    Adam opt(2e-3);
    std::vector<Tensor> set;
    for (int i = 0; i < 100; ++i) set.push_back(random_tensor(rng, 3, 32, 32, 0.02, 0.98));

    double l1 = 1.0;
    for (int iter = 0; iter < 1500 && l1 > 0.045; ++iter) {
        const Tensor& x = set[iter % set.size()];
        g.zero_grads();
        const Tensor y = g.forward(x);
        Tensor gy = y;
        double acc = 0.0;
        for (size_t i = 0; i < y.size(); ++i) {
            const double e = y.data[i] - x.data[i];
            gy.data[i] = 2.0 * e / static_cast<double>(y.size());
            acc += std::abs(e);
        }
        l1 = acc / static_cast<double>(y.size());
        g.backward(gy);
        opt.step(g.params());
    }
    // evaluate on a few held-in samples
    double total = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Tensor y = g.forward(set[i]);
        double acc = 0.0;
        for (size_t j = 0; j < y.size(); ++j) acc += std::abs(y.data[j] - set[i].data[j]);
        total += acc / static_cast<double>(y.size());
    }
    CHECK(total / 10.0 < 0.05);
}
