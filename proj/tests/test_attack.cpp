#include <doctest.h>

#include "advslam/attack.hpp"
#include "gradient_check.hpp"
#include "test_util.hpp"

using namespace advslam;
using namespace advslam::test;

namespace {

SurrogateModel test_model(uint64_t seed = 11) {
    return SurrogateModel::seeded(Architecture::tiny(16, 16, 5), seed);
}

AttackConfig fgsm_config(double eps) {
    AttackConfig cfg;
    cfg.method = AttackMethod::FGSM;
    cfg.epsilon = eps;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("attack");

TEST_CASE("epsilon zero is the identity, bitwise") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(3);
    const ImageFrame frame = random_frame(rng, 20, 14, 3);
    for (auto method : {AttackMethod::FGSM, AttackMethod::PGD}) {
        AttackConfig cfg = fgsm_config(0.0);
        cfg.method = method;
        const AdversarialFrame adv = attack_frame(model, frame, 0, cfg);
        CHECK(adv.frame.pixels == frame.pixels);
        for (double d : adv.perturbation.delta) CHECK(d == 0.0);
    }
}

TEST_CASE("a zero-gradient model leaves the frame untouched (sign(0) = 0)") {
    SurrogateModel model = test_model();
    for (size_t li = 0; li < model.layer_count(); ++li) {
        if (!model.layer_has_params(li)) continue;
        for (auto& v : model.layer_weights(li).data) v = 0.0;
    }
    std::mt19937_64 rng(5);
    const ImageFrame frame = random_frame(rng, 16, 16, 3);
    const AdversarialFrame adv = fgsm(model, frame, 1, fgsm_config(0.1));
    CHECK(adv.frame.pixels == frame.pixels);
}

TEST_CASE("FGSM deltas at model scale live in {-eps, 0, +eps} exactly") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(7);
    Tensor input(3, 16, 16);
    for (auto& v : input.data) v = u01(rng);

    const double eps = 0.05;
    const Tensor delta = attack_delta(model, input, 2, fgsm_config(eps));
    int nonzero = 0;
    for (double d : delta.data) {
        const bool valid = d == eps || d == -eps || d == 0.0;
        CHECK(valid);
        if (d != 0.0) ++nonzero;
    }
    CHECK(nonzero > 0);
}

TEST_CASE("the L-inf bound holds exactly for every paper epsilon") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(11);
    for (double eps : {0.005, 0.05, 0.10, 0.15, 0.30}) {
        const ImageFrame frame = random_frame(rng, 25, 19, 3);
        for (auto method : {AttackMethod::FGSM, AttackMethod::PGD}) {
            AttackConfig cfg = fgsm_config(eps);
            cfg.method = method;
            cfg.iterations = 5;
            const AdversarialFrame adv = attack_frame(model, frame, 1, cfg);
            for (size_t i = 0; i < frame.pixels.size(); ++i) {
                CHECK(std::abs(adv.frame.pixels[i] - frame.pixels[i]) <= eps);
                CHECK(adv.frame.pixels[i] >= 0.0);
                CHECK(adv.frame.pixels[i] <= 1.0);
                // the stored realized delta reproduces the output exactly
                CHECK(frame.pixels[i] + adv.perturbation.delta[i] == adv.frame.pixels[i]);
            }
        }
    }
}

TEST_CASE("PGD with k=1 and alpha=eps equals FGSM bitwise") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const ImageFrame frame = random_frame(rng, 21, 17, 3);
        AttackConfig f = fgsm_config(0.08);
        AttackConfig p = f;
        p.method = AttackMethod::PGD;
        p.iterations = 1;
        p.alpha = p.epsilon;
        const AdversarialFrame a = fgsm(model, frame, 3, f);
        const AdversarialFrame b = pgd(model, frame, 3, p);
        CHECK(a.frame.pixels == b.frame.pixels);
        CHECK(a.perturbation.delta == b.perturbation.delta);
    }
}

TEST_CASE("PGD keeps delta within the ball for every iteration count") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(17);
    Tensor input(3, 16, 16);
    for (auto& v : input.data) v = u01(rng);
    AttackConfig cfg = fgsm_config(0.10);
    cfg.method = AttackMethod::PGD;
    cfg.alpha = 0.03;
    for (int k = 1; k <= 10; ++k) {
        cfg.iterations = k;
        const Tensor delta = attack_delta(model, input, 0, cfg);
        for (double d : delta.data) CHECK(std::abs(d) <= 0.10);
    }
}

TEST_CASE("untargeted attacks do not reduce the loss on most seeded frames") {
    const SurrogateModel model = test_model(23);
    std::mt19937_64 rng(19);
    int improved = 0, total = 0;
    AttackConfig cfg = fgsm_config(0.05);
    cfg.method = AttackMethod::PGD;
    cfg.iterations = 5;
    for (int trial = 0; trial < 100; ++trial) {
        Tensor input(3, 16, 16);
        for (auto& v : input.data) v = u01(rng);
        const int label = model.classify(input);
        const Tensor delta = attack_delta(model, input, label, cfg);
        Tensor adv = input;
        for (size_t i = 0; i < adv.size(); ++i) {
            adv.data[i] = std::clamp(adv.data[i] + delta.data[i], 0.0, 1.0);
        }
        if (model.loss(adv, label) >= model.loss(input, label)) ++improved;
        ++total;
    }
    CHECK(improved >= total * 95 / 100);
}

TEST_CASE("target label picking is seeded, in range and never the true label") {
    AttackConfig cfg;
    cfg.mode = AttackMode::Targeted;
    cfg.seed = 99;

    SUBCASE("two classes leave a single choice") {
        cfg.policy = TargetLabelPolicy::RandomPerFrame;
        for (uint64_t frame = 0; frame < 10; ++frame) {
            CHECK(pick_target_label(cfg, frame, 0, 2) == 1);
            CHECK(pick_target_label(cfg, frame, 1, 2) == 0);
        }
    }
    SUBCASE("fixed policy returns its constant") {
        cfg.policy = TargetLabelPolicy::Fixed;
        cfg.fixed_label = 3;
        CHECK(pick_target_label(cfg, 0, 0, 10) == 3);
        CHECK(pick_target_label(cfg, 7, 9, 10) == 3);
        cfg.fixed_label = 12;
        CHECK_THROWS_AS(pick_target_label(cfg, 0, 0, 10), ConfigError);
    }
    SUBCASE("random policy is deterministic per frame and avoids the true label") {
        cfg.policy = TargetLabelPolicy::RandomPerFrame;
        std::vector<int> first, second;
        for (uint64_t frame = 0; frame < 200; ++frame) {
            const int t = pick_target_label(cfg, frame, 4, 10);
            CHECK(t >= 0);
            CHECK(t < 10);
            CHECK(t != 4);
            first.push_back(t);
        }
        for (uint64_t frame = 0; frame < 200; ++frame) {
            second.push_back(pick_target_label(cfg, frame, 4, 10));
        }
        CHECK(first == second);
        // all 9 admissible labels appear over 200 draws
        std::vector<int> seen(10, 0);
        for (int t : first) seen[t] = 1;
        int distinct = 0;
        for (int s : seen) distinct += s;
        CHECK(distinct == 9);
    }
    SUBCASE("fewer than two classes cannot be targeted randomly") {
        cfg.policy = TargetLabelPolicy::RandomPerFrame;
        CHECK_THROWS_AS(pick_target_label(cfg, 0, 0, 1), ConfigError);
    }
}

TEST_CASE("targeted FGSM steps against the target gradient") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(29);
    Tensor input(3, 16, 16);
    for (auto& v : input.data) v = u01(rng);

    AttackConfig cfg = fgsm_config(0.05);
    cfg.mode = AttackMode::Targeted;
    const int target = 4;
    const Tensor delta = attack_delta(model, input, target, cfg);
    const Tensor grad = model.loss_gradient(input, target);
    for (size_t i = 0; i < delta.size(); ++i) {
        CHECK(delta.data[i] == -cfg.epsilon * sign0(grad.data[i]));
    }
}

TEST_CASE("depth attacks respect the scaled bound and the invalid mask") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(31);
    DepthFrame depth;
    depth.width = 24;
    depth.height = 18;
    depth.depth.resize(24 * 18);
    for (size_t i = 0; i < depth.depth.size(); ++i) {
        depth.depth[i] = (i % 7 == 0) ? 0.0 : uniform(rng, 0.5, 4.5);
    }

    AttackConfig cfg = fgsm_config(0.10);
    cfg.depth_min = 0.0;
    cfg.depth_max = 5.0;

    SUBCASE("epsilon zero leaves depth untouched") {
        AttackConfig zero = cfg;
        zero.epsilon = 0.0;
        const DepthFrame out = attack_depth(model, depth, 0, zero);
        CHECK(out.depth == depth.depth);
    }

    SUBCASE("per-pixel change is bounded by eps * range") {
        const int label = surrogate_true_label_depth(model, depth, cfg);
        const DepthFrame out = attack_depth(model, depth, label, cfg);
        int changed = 0;
        for (size_t i = 0; i < depth.depth.size(); ++i) {
            if (depth.depth[i] == 0.0) {
                CHECK(out.depth[i] == 0.0);  // invalid stays invalid
            } else {
                CHECK(out.depth[i] > 0.0);  // valid stays valid
                CHECK(std::abs(out.depth[i] - depth.depth[i]) <= 0.10 * 5.0);
                if (out.depth[i] != depth.depth[i]) ++changed;
            }
        }
        CHECK(changed > 0);
    }

    SUBCASE("degenerate range is rejected") {
        AttackConfig bad = cfg;
        bad.depth_max = bad.depth_min;
        CHECK_THROWS_AS(attack_depth(model, depth, 0, bad), ConfigError);
    }
}

TEST_CASE("region masking zeroes the perturbation outside the union") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(37);
    const ImageFrame frame = random_frame(rng, 160, 120, 3);
    Perturbation p = compute_perturbation(model, frame, 1, fgsm_config(0.1));

    SUBCASE("empty region list zeroes everything") {
        const Perturbation masked = mask_perturbation(p, {});
        for (double d : masked.delta) CHECK(d == 0.0);
    }
    SUBCASE("a full-frame box changes nothing") {
        const Perturbation masked = mask_perturbation(p, {Box{0, 0, 160, 120}});
        CHECK(masked.delta == p.delta);
    }
    SUBCASE("support is exactly inside the box") {
        const Box box{10, 20, 100, 50};
        const Perturbation masked = mask_perturbation(p, {box});
        for (int y = 0; y < 120; ++y) {
            for (int x = 0; x < 160; ++x) {
                const bool inside = x >= 10 && x < 110 && y >= 20 && y < 70;
                for (int c = 0; c < 3; ++c) {
                    if (!inside) {
                        CHECK(masked.at(x, y, c) == 0.0);
                    } else {
                        CHECK(masked.at(x, y, c) == p.at(x, y, c));
                    }
                }
            }
        }
    }
    SUBCASE("overlapping boxes mask by their union") {
        const Perturbation masked = mask_perturbation(p, {Box{0, 0, 40, 40}, Box{20, 20, 40, 40}});
        for (int y = 0; y < 120; ++y) {
            for (int x = 0; x < 160; ++x) {
                const bool inside = (x < 40 && y < 40) || (x >= 20 && x < 60 && y >= 20 && y < 60);
                if (!inside) CHECK(masked.at(x, y, 0) == 0.0);
            }
        }
    }
}

TEST_CASE("attacks are deterministic functions of their inputs") {
    const SurrogateModel model = test_model();
    std::mt19937_64 rng(41);
    const ImageFrame frame = random_frame(rng, 30, 22, 3);
    AttackConfig cfg = fgsm_config(0.1);
    cfg.method = AttackMethod::PGD;
    cfg.iterations = 4;
    const AdversarialFrame a = attack_frame(model, frame, 2, cfg);
    const AdversarialFrame b = attack_frame(model, frame, 2, cfg);
    CHECK(a.frame.pixels == b.frame.pixels);
}

TEST_CASE("attack config validation") {
    AttackConfig cfg;
    cfg.epsilon = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = AttackConfig{};
    cfg.method = AttackMethod::PGD;
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = AttackConfig{};
    CHECK(cfg.pgd_alpha() == doctest::Approx(cfg.epsilon / 4));
}

TEST_SUITE_END();
