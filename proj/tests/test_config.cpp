#include <sstream>

#include <gtest/gtest.h>

#include "berryphase/config.hpp"
#include "berryphase/report.hpp"

using namespace berryphase;

TEST(Config, ParsesKeysCommentsAndLists) {
    const RunConfig cfg = parse_config(R"(
# strong coupling run
U = 6
g = 6.0      # in units of t
d = 0.1
mode = noncollinear
path = [[0,0],[1,1],[2,0]]
steps_per_segment = 17
scf_tol = 1e-9
sweep_U = [0.5, 2, 6]
sweep_g = 6
sweep_paths = triangle, square
format = json
workers = 3
)");
    EXPECT_EQ(cfg.model.U, 6.0);
    EXPECT_EQ(cfg.model.g, 6.0);
    EXPECT_EQ(cfg.model.mode, DecouplingMode::noncollinear);
    EXPECT_EQ(cfg.path, "custom");
    ASSERT_EQ(cfg.path_sites.size(), 3u);
    EXPECT_EQ(cfg.path_sites[1].x, 1);
    EXPECT_EQ(cfg.steps_per_segment, 17);
    EXPECT_EQ(cfg.scf.tol, 1e-9);
    EXPECT_EQ(cfg.sweep_U, (std::vector<double>{0.5, 2, 6}));
    EXPECT_EQ(cfg.sweep_g, (std::vector<double>{6}));
    EXPECT_EQ(cfg.sweep_paths, (std::vector<std::string>{"triangle", "square"}));
    EXPECT_EQ(cfg.format, OutputFormat::json);
    EXPECT_EQ(cfg.workers, 3);
    const PathSpec p = cfg.path_spec();
    EXPECT_EQ(p.segments(), 3);
    EXPECT_EQ(p.steps_per_segment, 17);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse_config("U 6"), InputError);
    EXPECT_THROW(parse_config("colour = red"), InputError);
    EXPECT_THROW(parse_config("U = six"), InputError);
    EXPECT_THROW(parse_config("path = [[0,0],[1]]"), InputError);
    EXPECT_THROW(parse_config("mode = sideways"), InputError);
    EXPECT_THROW(parse_config("sweep_paths = [triangle"), InputError);
    EXPECT_THROW(parse_config("sweep_paths = [1, 2]"), InputError);
    EXPECT_THROW(parse_config("path = hexagon").validate(), LookupError);
    EXPECT_THROW(parse_config("U = -1").validate(), InputError);
    EXPECT_THROW(parse_config("steps_per_segment = 4").validate(), InputError);
    EXPECT_THROW(load_config("/nonexistent/berryphase.conf"), InputError);
}

TEST(Config, PathListSpellings) {
    const std::vector<std::string> expect{"triangle", "square"};
    EXPECT_EQ(parse_config("sweep_paths = [\"triangle\", \"square\"]").sweep_paths, expect);
    EXPECT_EQ(parse_config("sweep_paths = [triangle, square]").sweep_paths, expect);
    EXPECT_EQ(parse_config("sweep_paths = triangle,square").sweep_paths, expect);
}

TEST(Config, LaterKeysOverrideEarlierOnes) {
    RunConfig cfg = parse_config("U = 6\nU = 2\n");
    EXPECT_EQ(cfg.model.U, 2.0);
    cfg.set_key("U", "0.5");
    EXPECT_EQ(cfg.model.U, 0.5);
    cfg.set_key("path", "square");
    EXPECT_TRUE(cfg.path_sites.empty());
}

TEST(Config, HashIgnoresWorkersAndOutput) {
    RunConfig a = parse_config("U = 6\nsweep_U = [0.5, 6]\n");
    RunConfig b = a;
    b.workers = 8;
    b.output = "elsewhere.csv";
    EXPECT_EQ(a.hash(), b.hash());
    b.model.U = 5.0;
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(hash_hex(a.hash()).size(), 16u);
}

TEST(Report, CsvLayoutAndFloatFormat) {
    Table t;
    t.columns = {"x", "n", "name", "missing"};
    t.add_row({0.1, 3LL, std::string("a,b"), Cell{}});
    t.trailer.push_back("done");
    std::ostringstream os;
    write_csv(os, t, 0xabcULL);
    EXPECT_EQ(os.str(), std::string("# berryphase version=") + kVersion +
                            " config_hash=0000000000000abc\n"
                            "x,n,name,missing\n"
                            "0.10000000000000001,3,\"a,b\",\n"
                            "# done\n");
    EXPECT_THROW(t.add_row({1.0}), InputError);
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(Report, JsonLines) {
    Table t;
    t.columns = {"U", "factor", "path", "gap"};
    t.add_row({6.0, -1LL, std::string("triangle"), std::numeric_limits<double>::infinity()});
    std::ostringstream os;
    write_json_lines(os, t);
    EXPECT_EQ(os.str(), "{\"U\":6.0,\"factor\":-1,\"path\":\"triangle\",\"gap\":null}\n");
}

TEST(Report, PathRowForFailure) {
    PathOutcome o{6.0, 6.0, "triangle", "scf_failure", "no convergence", std::nullopt};
    const std::vector<Cell> row = path_row(o);
    EXPECT_EQ(row.size(), path_columns().size());
    EXPECT_TRUE(std::holds_alternative<std::monostate>(row[4]));
    EXPECT_EQ(std::get<std::string>(row.back()), "no convergence");
}
