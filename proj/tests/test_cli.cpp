// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "bench/corpus.hpp"
#include "bench/train.hpp"
#include "core/binary_io.hpp"
#include "hsi/cube_io.hpp"
#include "test_util.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

using namespace msfa;
using msfa::testing::TempDir;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string(MSFA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string q(const std::string& s)
{
    return "'" + s + "'";
}

} // namespace

TEST_CASE("cli exit codes")
{
    TempDir tmp("cli");
    CHECK(run("--help") == 0);
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("eval --method id") == 1);
    CHECK(run("make-corpus --source fractal --out " + q(tmp.file("x"))) == 1);

    CHECK(run("make-corpus --count 12 --size 20 --seed 2 --out " + q(tmp.file("c"))) == 0);
    CHECK(run("eval --method id --data " + q(tmp.file("c")) + " --report " + q(tmp.file("r/id.json"))) == 0);
    CHECK(run("eval --method bogus --data " + q(tmp.file("c"))) == 1);
    CHECK(run("eval --method id --data " + q(tmp.file("missing"))) == 2);
    CHECK(run("eval --method net:id-unet --data " + q(tmp.file("c"))) == 2);
    CHECK(run("demosaic --method id --in " + q(tmp.file("none.msm")) + " --out " + q(tmp.file("o.hsc"))) == 2);
    CHECK(run("train --config " + q(tmp.file("none.json"))) == 2);

    const bench::Dataset d = bench::Dataset::open(tmp.file("c"));
    const std::string scene = d.split().train.front();
    CHECK(run("demosaic --method bilinear --in " + q(d.mosaic_path(scene)) + " --out " + q(tmp.file("wb.hsc"))) == 0);
    CHECK(load_cube(tmp.file("wb.hsc")).bands() == 16);

    // A non-finite ground-truth value makes the training loss NaN.
    SpectralCube t = d.load_truth(scene);
    t.at(0, 10, 10) = std::nanf("");
    save_cube(t, d.truth_path(scene));
    bench::TrainConfig c;
    c.epochs = 1;
    c.batch_size = 4;
    c.dataset = tmp.file("c");
    c.output_dir = tmp.file("run");
    io::write_file(tmp.file("train.json"), bench::config_to_json(c));
    CHECK(run("train --quiet --config " + q(tmp.file("train.json"))) == 3);
}
