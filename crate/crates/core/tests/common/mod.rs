#![allow(dead_code)]

use metric_pair::cli::{run, Outcome};

pub fn cli(args: &[&str]) -> Outcome {
    run(std::iter::once("metric-pair").chain(args.iter().copied()))
}

/// One invocation per subcommand, all seeded where sampling occurs.
pub const MATRIX: &[&[&str]] = &[
    &["catalog", "--format", "json"],
    &["catalog", "--id", "gpflrw", "--format", "json"],
    &[
        "eval", "--metric", "cubic2d", "--point", "0,0", "--disp", "1,1", "--format", "json",
    ],
    &[
        "eval",
        "--metric",
        "complex_cubic3d",
        "--point",
        "0,0,0",
        "--disp",
        "1,0.5,-2",
        "--format",
        "json",
    ],
    &[
        "distance",
        "--metric",
        "euclidean",
        "--dim",
        "2",
        "--from",
        "0,0",
        "--to",
        "3,4",
        "--seed",
        "7",
        "--format",
        "json",
    ],
    &[
        "distance", "--metric", "cubic2d", "--from", "0,0", "--to", "1,1", "--to", "1,-1",
        "--seed", "11", "--format", "json",
    ],
    &[
        "check",
        "--metric",
        "minkowski",
        "--seed",
        "7",
        "--format",
        "json",
    ],
    &[
        "check", "--metric", "cubic2d", "--seed", "3", "--format", "json",
    ],
    &[
        "check",
        "--metric",
        "hipest",
        "--seed",
        "5",
        "--pairs",
        "0",
        "--triples",
        "0",
        "--format",
        "json",
    ],
    &[
        "hessian",
        "--potential",
        "(x^3+y^3)/6",
        "--axes",
        "x,y",
        "--order",
        "3",
        "--format",
        "json",
    ],
    &[
        "hessian",
        "--potential",
        "x*y",
        "--axes",
        "x,y",
        "--point",
        "0.5,-1",
        "--format",
        "json",
    ],
    &[
        "warp",
        "--verify-flrw",
        "--warp",
        "exp(t)",
        "--seed",
        "2",
        "--format",
        "json",
    ],
    &[
        "entropy",
        "--density",
        "1/2",
        "--interval",
        "0,2",
        "--format",
        "json",
    ],
    &[
        "projective",
        "--a",
        "1+2i,3",
        "--b",
        "-4+2i,0+6i",
        "--format",
        "json",
    ],
];
