#include "support.hpp"

#include "tsgan/dataset.hpp"
#include "tsgan/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace tsgan;
using tsgan::testing::make_toy_dataset;

TEST_CASE("parse comma and tab separated rows") {
    const auto comma = parse_ucr("1,0.5,0.25,1.5\n-1,2,3,4\n");
    const auto tab = parse_ucr("1\t0.5\t0.25\t1.5\n-1\t2\t3\t4\n");
    for (const auto* ds : {&comma, &tab}) {
        CHECK(ds->size() == 2);
        CHECK(ds->length == 3);
        CHECK(ds->num_classes == 2);
        CHECK(ds->series[0] == Series{0.5, 0.25, 1.5});
        CHECK(ds->labels == std::vector<int>{2, 1});
        CHECK(ds->label_names == std::vector<std::string>{"-1", "1"});
        CHECK_FALSE(ds->normalized);
    }
    const auto spaced = parse_ucr("  3  1.0e0   2 \r\n\n7 4 5\n");
    CHECK(spaced.size() == 2);
    CHECK(spaced.labels == std::vector<int>{1, 2});
    CHECK(spaced.label_names == std::vector<std::string>{"3", "7"});
    CHECK(spaced.series[0] == Series{1.0, 2.0});
}

TEST_CASE("labels are remapped by ascending code") {
    const auto ds = parse_ucr("5,1,1\n-2,1,1\n0,1,1\n5,2,2\n");
    CHECK(ds.labels == std::vector<int>{3, 1, 2, 3});
    CHECK(ds.label_names == std::vector<std::string>{"-2", "0", "5"});
    CHECK(ds.class_count(3) == 2);
    CHECK(ds.class_indices(3) == std::vector<std::size_t>{0, 3});
}

TEST_CASE("single row files parse") {
    const auto ds = parse_ucr("2,0.1,0.2");
    CHECK(ds.size() == 1);
    CHECK(ds.num_classes == 1);
    CHECK(ds.labels == std::vector<int>{1});
}

TEST_CASE("malformed rows report the line") {
    CHECK_THROWS_WITH_AS(parse_ucr("1,1,2\n1,1\n", "f.tsv"), doctest::Contains("f.tsv:2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_ucr("1,1,2\n\n1,1,x\n", "f.tsv"), doctest::Contains("f.tsv:3"), ParseError);
    CHECK_THROWS_WITH_AS(parse_ucr("1.5,1,2\n", "f.tsv"), doctest::Contains("not an integer"), ParseError);
    CHECK_THROWS_WITH_AS(parse_ucr("a,1,2\n", "f.tsv"), doctest::Contains("f.tsv:1"), ParseError);
    CHECK_THROWS_AS(parse_ucr("1\n"), ParseError);
    CHECK_THROWS_AS(parse_ucr("1,nan,2\n"), ParseError);
    CHECK_THROWS_AS(parse_ucr("\n\n"), ParseError);
    CHECK_THROWS_AS(load_ucr("/nonexistent/data.tsv"), ParseError);
}

TEST_CASE("write and load round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "tsgan_dataio_roundtrip";
    std::filesystem::create_directories(dir);
    auto ds = parse_ucr("-1,0.1,0.30000000000000004,1e-300\n1,3.14159265358979,2,-7\n");
    write_ucr(ds, dir / "out.tsv");
    CHECK_FALSE(std::filesystem::exists(dir / "out.tsv.tmp"));
    const auto back = load_ucr(dir / "out.tsv");
    CHECK(back.series == ds.series);
    CHECK(back.labels == ds.labels);
    CHECK(back.label_names == ds.label_names);
    std::filesystem::remove_all(dir);
}

TEST_CASE("min-max normalization") {
    const auto raw = parse_ucr("1,-2,0,6\n2,1,2,3\n");
    const auto n = normalize_minmax(raw);
    CHECK(n.normalized);
    CHECK(n.norm_min == -2.0);
    CHECK(n.norm_max == 6.0);
    CHECK(n.series[0] == Series{0.0, 0.25, 1.0});
    CHECK(n.series[1][0] == 0.375);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto back = denormalize(n.series[i], n.norm_min, n.norm_max);
        for (std::size_t t = 0; t < back.size(); ++t) CHECK(std::abs(back[t] - raw.series[i][t]) < 1e-12);
    }

    const auto flat = normalize_minmax(parse_ucr("1,4,4\n2,4,4\n"));
    for (const auto& s : flat.series)
        for (double v : s) CHECK(v == 0.5);
    CHECK_THROWS_AS(normalize_minmax(Dataset{}), ArgumentError);
}

TEST_CASE("normalization round trip on random data") {
    Rng rng(1);
    std::uniform_real_distribution<double> u(-50.0, 80.0);
    std::string text;
    for (int i = 0; i < 20; ++i) {
        text += std::to_string(i % 3);
        for (int t = 0; t < 12; ++t) {
            std::ostringstream os;
            os.precision(17);
            os << ',' << u(rng);
            text += os.str();
        }
        text += '\n';
    }
    const auto raw = parse_ucr(text);
    const auto n = normalize_minmax(raw);
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (double v : n.series[i]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const auto back = denormalize(n.series[i], n.norm_min, n.norm_max);
        for (std::size_t t = 0; t < back.size(); ++t) CHECK(std::abs(back[t] - raw.series[i][t]) < 1e-12);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
}

TEST_CASE("subsampling") {
    const auto ds = make_toy_dataset(20, 3, 8);
    const auto total = subsample_training(ds, 15, 42);
    CHECK(total.size() == 15);
    CHECK(total.series == subsample_training(ds, 15, 42).series);
    CHECK(total.series != subsample_training(ds, 15, 43).series);
    std::set<Series> unique(total.series.begin(), total.series.end());
    CHECK(unique.size() == 15);

    const auto per = subsample_training(ds, std::vector<std::size_t>{3, 7}, 5);
    CHECK(per.class_count(1) == 3);
    CHECK(per.class_count(2) == 7);
    CHECK(per.label_names == ds.label_names);
    CHECK(per.labels == subsample_training(ds, std::vector<std::size_t>{3, 7}, 5).labels);

    CHECK(subsample_training(ds, 40, 1).size() == 40);
    CHECK_THROWS_AS(subsample_training(ds, 41, 1), ArgumentError);
    CHECK_THROWS_AS(subsample_training(ds, std::vector<std::size_t>{21, 1}, 1), ArgumentError);
    CHECK_THROWS_AS(subsample_training(ds, std::vector<std::size_t>{1}, 1), ArgumentError);
}

TEST_CASE("dataset validation") {
    auto ds = make_toy_dataset(4, 1, 8);
    CHECK_NOTHROW(ds.validate());
    ds.series[2].pop_back();
    CHECK_THROWS_AS(ds.validate(), ArgumentError);
    ds = make_toy_dataset(4, 1, 8);
    ds.labels[0] = 3;
    CHECK_THROWS_AS(ds.validate(), ArgumentError);
}
