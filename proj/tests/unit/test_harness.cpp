#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mtgcd/harness/batch.hpp"
#include "mtgcd/harness/datagen.hpp"
#include "mtgcd/harness/schedule.hpp"
#include "mtgcd/harness/train.hpp"
#include "mtgcd/model/checkpoint.hpp"

using namespace mtgcd;
using namespace mtgcd::harness;
using mtgcd::model::CheckpointInfo;
using mtgcd::model::load_checkpoint;
using mtgcd::model::MTGCDNet;
using mtgcd::model::read_checkpoint_info;
using mtgcd::model::save_checkpoint;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "mtgcd_harness_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

scenegen::SceneDistribution small_dist() {
    scenegen::SceneDistribution d;
    d.image_height = 64;
    d.image_width = 64;
    d.buildings_min = 1;
    d.buildings_max = 3;
    d.side_max = 14.0;
    d.min_changed = 1;
    return d;
}

// Config small enough that a few optimizer steps run in well under a second.
ExperimentConfig smoke_config(const fs::path& out_dir) {
    ExperimentConfig cfg;
    cfg.seed = 7;
    cfg.model.encoder_width = 2;
    cfg.model.c_sh = 4;
    cfg.model.tstl_channels = 4;
    cfg.model.c_k = 2;
    cfg.model.c_att = 4;
    cfg.batch_size = 1;
    cfg.crop_size = 16;
    cfg.schedule.max_iters = 3;
    cfg.eval_interval = 100; // only the final evaluation fires
    cfg.output_dir = out_dir.string();
    return cfg;
}

} // namespace

TEST_CASE("poly schedule: full rate at 0, ~54% at midpoint, zero at the end") {
    ExperimentConfig cfg;
    cfg.optimizer.lr0 = 0.01;
    cfg.schedule.max_iters = 1000;
    cfg.schedule.poly_power = 0.9;
    CHECK(poly_lr(0, cfg) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(poly_lr(500, cfg) == doctest::Approx(0.0053588673).epsilon(1e-7));
    CHECK(poly_lr(1000, cfg) == 0.0);
    CHECK(poly_lr(250, 0.02, 1000, 1.0) == doctest::Approx(0.015).epsilon(1e-12));
    CHECK_THROWS_AS(poly_lr(1001, cfg), ConfigError);
    CHECK_THROWS_AS(poly_lr(-1, cfg), ConfigError);
}

TEST_CASE("experiment config round-trips through json losslessly") {
    ExperimentConfig cfg;
    cfg.seed = 123;
    cfg.model.encoder_width = 16;
    cfg.model.c_sh = 32;
    cfg.loss.lambda2 = 0.25;
    cfg.data.train_pairs = 17;
    cfg.augment.rot90 = false;
    cfg.batch_size = 4;
    cfg.output_dir = "runs/custom";

    const nlohmann::json j = cfg;
    const ExperimentConfig back = j.get<ExperimentConfig>();
    CHECK(nlohmann::json(back).dump() == j.dump());
    CHECK(back.seed == 123);
    CHECK(back.model.encoder_width == 16);
    CHECK(back.loss.lambda2 == 0.25);
    CHECK_FALSE(back.augment.rot90);
}

TEST_CASE("config validation ties the bin table to the head width") {
    ExperimentConfig cfg;
    cfg.model.offset_bins = 4; // standard table has 10 categories
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.loss.field_mode = model::VectorMode::regression; // model stays classification
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ExperimentConfig{};
    cfg.crop_size = 100; // not a stride multiple
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("MTGCD_SEED overrides the config seed and rejects garbage") {
    const fs::path dir = fresh_dir("envseed");
    ExperimentConfig cfg;
    cfg.seed = 1;
    io::write_text(dir / "cfg.json", nlohmann::json(cfg).dump());

    setenv("MTGCD_SEED", "777", 1);
    CHECK(load_experiment_config(dir / "cfg.json").seed == 777);

    setenv("MTGCD_SEED", "12abc", 1);
    CHECK_THROWS_AS(load_experiment_config(dir / "cfg.json"), ConfigError);

    unsetenv("MTGCD_SEED");
    CHECK(load_experiment_config(dir / "cfg.json").seed == 1);
}

TEST_CASE("a sample pair survives the on-disk layout bit for bit") {
    const fs::path dir = fresh_dir("roundtrip") / "pair_0000";
    const scenegen::SceneSpec scene = scenegen::sample_scene_seeded(small_dist(), 404);
    const scenegen::SamplePair p = scenegen::make_pair(scene);
    io::write_pair(dir, p, scene);
    const io::LoadedPair back = io::read_pair(dir);
    CHECK(back.pair == p);
    CHECK(nlohmann::json(back.scene).dump() == nlohmann::json(scene).dump());
}

TEST_CASE("datagen is deterministic across roots and splits are disjoint streams") {
    const fs::path a = fresh_dir("datagen_a");
    const fs::path b = fresh_dir("datagen_b");
    generate_split(a, "train", small_dist(), 2, 99);
    generate_split(b, "train", small_dist(), 2, 99);
    generate_split(a, "val", small_dist(), 2, 99);

    for (int i = 0; i < 2; ++i) {
        const auto name = pair_dir_name(i);
        const auto pa = io::read_pair(a / "train" / name).pair;
        const auto pb = io::read_pair(b / "train" / name).pair;
        CHECK(pa == pb);
        // same master seed, different split salt: different scenes
        const auto pv = io::read_pair(a / "val" / name).pair;
        CHECK_FALSE(pa == pv);
    }

    CHECK(split_salt("train") == kTrainSalt);
    CHECK(split_salt("test_out") == kTestOutSalt);
    CHECK_THROWS_AS(split_salt("holdout"), ConfigError);
}

TEST_CASE("list_pairs returns lexicographically ordered pair directories") {
    const fs::path root = fresh_dir("listing");
    generate_split(root, "train", small_dist(), 3, 5);
    const auto dirs = io::list_pairs(root / "train");
    REQUIRE(dirs.size() == 3);
    CHECK(dirs[0].filename() == "pair_0000");
    CHECK(dirs[1].filename() == "pair_0001");
    CHECK(dirs[2].filename() == "pair_0002");
    CHECK_THROWS_AS(io::list_pairs(root / "missing"), IoError);

    const auto loaded = load_split(root, "train");
    CHECK(loaded.size() == 3);
    CHECK_THROWS_AS(load_split(root, "val"), IoError);
}

TEST_CASE("make_batch reproduces the supervision mask contract") {
    const scenegen::SceneSpec scene = scenegen::sample_scene_seeded(small_dist(), 611);
    const scenegen::SamplePair p = scenegen::make_pair(scene);
    const scenegen::SamplePair q = scenegen::make_pair(scenegen::sample_scene_seeded(small_dist(), 612));
    const auto bins = vecfield::BinTable::standard();
    const auto b =
        make_batch<float>({&p, &q}, bins, model::VectorMode::classification);

    const int H = p.height(), W = p.width();
    REQUIRE(b.img_t1.shape() == std::vector<int>({2, 3, H, W}));
    const auto& L = b.labels;

    for (int n = 0; n < 2; ++n) {
        const scenegen::SamplePair& s = n == 0 ? p : q;
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c) {
                const int64_t i = (int64_t(n) * H + r) * W + c;
                CHECK(L.change[i] == s.change_mask(r, c));
                CHECK(L.change_mask[i] == (s.change_ignore(r, c) ? 0 : 1));
                CHECK(L.seg_t1[i] == s.seg_t1(r, c));
                CHECK(L.seg_t1_mask[i] == 1);
                CHECK(L.seg_t2_mask[i] == (s.ignore_mask(r, c) ? 0 : 1));
                const bool roof1 = s.seg_t1(r, c) == labelgen::kRoof;
                const bool roof2 = s.seg_t2(r, c) == labelgen::kRoof;
                CHECK(L.st_t1_mask[i] == (roof1 ? 1 : 0));
                CHECK(L.st_t2_mask[i] == ((roof2 && !s.ignore_mask(r, c)) ? 1 : 0));
                const bool bt_ok = roof1 && !s.change_mask(r, c) && !s.ignore_mask(r, c);
                CHECK(L.bt_mask[i] == (bt_ok ? 1 : 0));
                CHECK(L.st_t1_x[i] == vecfield::encode_value(s.st_t1.vx(r, c), bins));
                CHECK(L.bt_y[i] == vecfield::encode_value(s.bt.vy(r, c), bins));

                // 0 -> -2, 255 -> +2, linear in between
                const float v = b.img_t1.at4(n, 0, r, c);
                const float want = (float(s.image_t1.at(r, c, 0)) / 255.0f - 0.5f) / 0.25f;
                CHECK(v == want);
            }
    }
}

TEST_CASE("make_batch in regression mode carries the raw fields") {
    const scenegen::SamplePair p = scenegen::make_pair(scenegen::sample_scene_seeded(small_dist(), 613));
    const auto b = make_batch<double>({&p}, vecfield::BinTable::standard(),
                                      model::VectorMode::regression);
    const int H = p.height(), W = p.width();
    REQUIRE(b.labels.st_t1_field.shape() == std::vector<int>({1, 2, H, W}));
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            CHECK(b.labels.st_t1_field.at4(0, 0, r, c) == double(p.st_t1.vx(r, c)));
            CHECK(b.labels.st_t1_field.at4(0, 1, r, c) == double(p.st_t1.vy(r, c)));
            CHECK(b.labels.bt_field.at4(0, 0, r, c) == double(p.bt.vx(r, c)));
        }
    CHECK(b.labels.st_t1_x.numel() == 0);
}

TEST_CASE("argmax and field decoding invert the head encodings") {
    // 2-class logits with a known winner per pixel
    Tensor<float> logits({1, 3, 1, 2});
    logits.at4(0, 0, 0, 0) = 5;
    logits.at4(0, 1, 0, 0) = 1;
    logits.at4(0, 2, 0, 0) = 2;
    logits.at4(0, 0, 0, 1) = -1;
    logits.at4(0, 1, 0, 1) = 4;
    logits.at4(0, 2, 0, 1) = 0;
    const auto cls = argmax_classes<float>(logits, 0);
    CHECK(cls(0, 0) == 0);
    CHECK(cls(0, 1) == 1);

    const auto bins = vecfield::BinTable::standard();
    Tensor<float> lx({1, 10, 1, 1}), ly({1, 10, 1, 1});
    lx.at4(0, 6, 0, 0) = 9; // bin 6 rep: 16
    ly.at4(0, 2, 0, 0) = 9; // bin 2 rep: -36
    const auto field = decode_predicted_field(lx, ly, 0, bins);
    CHECK(field.vx(0, 0) == doctest::Approx(16.0f));
    CHECK(field.vy(0, 0) == doctest::Approx(-36.0f));
}

TEST_CASE("checkpoints restore the exact forward function") {
    const fs::path dir = fresh_dir("checkpoint");
    ExperimentConfig cfg = smoke_config(dir / "unused");
    MTGCDNet<float> net(cfg.model, 2718);
    net.set_training(false);

    Rng rng(1);
    Tensor<float> a({1, 3, 16, 16}), b({1, 3, 16, 16});
    for (int64_t i = 0; i < a.numel(); ++i) {
        a[i] = static_cast<float>(rng.uniform(-1, 1));
        b[i] = static_cast<float>(rng.uniform(-1, 1));
    }
    const auto before = net.forward(a, b);

    save_checkpoint(dir, net, 57, {{"note", "smoke"}});
    CheckpointInfo info;
    auto back = load_checkpoint<float>(dir, &info);
    CHECK(info.iteration == 57);
    CHECK(info.metrics.at("note") == "smoke");
    CHECK(read_checkpoint_info(dir).iteration == 57);

    back.set_training(false);
    const auto after = back.forward(a, b);
    for (int64_t i = 0; i < before.change->value.numel(); ++i)
        CHECK(before.change->value[i] == after.change->value[i]);
}

TEST_CASE("structurally damaged checkpoints are rejected") {
    const fs::path dir = fresh_dir("tamper");
    ExperimentConfig cfg = smoke_config(dir / "unused");
    MTGCDNet<float> net(cfg.model, 3);
    save_checkpoint(dir, net, 1);

    // truncated weight blob
    const std::string blob = slurp(dir / "params.f32");
    {
        std::ofstream out(dir / "params.f32", std::ios::binary | std::ios::trunc);
        out.write(blob.data(), static_cast<std::streamsize>(blob.size() - 8));
    }
    CHECK_THROWS_AS(load_checkpoint<float>(dir), IoError);

    // restore the blob, damage the manifest's format marker
    {
        std::ofstream out(dir / "params.f32", std::ios::binary | std::ios::trunc);
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    }
    nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    manifest["format"] = "something-else";
    io::write_text(dir / "manifest.json", manifest.dump());
    CHECK_THROWS_AS(load_checkpoint<float>(dir), ConfigError);
}

TEST_CASE("training is byte-for-byte reproducible") {
    std::vector<scenegen::SamplePair> pairs;
    pairs.push_back(scenegen::make_pair(scenegen::sample_scene_seeded(small_dist(), 71)));
    pairs.push_back(scenegen::make_pair(scenegen::sample_scene_seeded(small_dist(), 72)));

    const fs::path da = fresh_dir("train_a");
    const fs::path db = fresh_dir("train_b");
    const auto ra = train_loaded<float>(smoke_config(da), pairs, pairs, /*quiet=*/true);
    const auto rb = train_loaded<float>(smoke_config(db), pairs, pairs, /*quiet=*/true);

    CHECK(slurp(da / "train_log.csv") == slurp(db / "train_log.csv"));
    CHECK(slurp(da / "val_log.csv") == slurp(db / "val_log.csv"));
    CHECK(ra.best_val_iou == rb.best_val_iou);
    CHECK(ra.best_iter == rb.best_iter);

    // both checkpoints exist and carry the experiment document
    const CheckpointInfo info = read_checkpoint_info(ra.last_checkpoint);
    CHECK(info.iteration == 3);
    const auto cfg_back = info.metrics.at("experiment").get<ExperimentConfig>();
    CHECK(cfg_back.seed == 7);
    CHECK(fs::exists(ra.best_checkpoint / "params.f32"));

    // a different seed changes the trajectory
    ExperimentConfig other = smoke_config(fresh_dir("train_c"));
    other.seed = 8;
    const auto rc = train_loaded<float>(other, pairs, pairs, /*quiet=*/true);
    CHECK(slurp(da / "train_log.csv") != slurp(fs::path(other.output_dir) / "train_log.csv"));
    (void)rc;
}
