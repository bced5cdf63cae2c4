/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// acvc: corrupt images, render severity grids, train and evaluate.
//
//   acvc corrupt --input <path|dir> --op <kind|pool> --severity <1..5|random>
//                --seed <u64> --output <dir>
//   acvc grid    --input <image> --ops <list|pool> --output <file> [--seed <u64>]
//   acvc train   --config <file>
//   acvc eval    --model <file> [--data <dir|builtin:target1|builtin:target2>]...
//
// --severity-table <file> (or $CORRUPTOR_SEVERITY_TABLE) replaces the
// shipped severity parameters. Exit codes: 0 ok, 2 usage or config,
// 3 IO, 4 invalid value or shape.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "acvc/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = acvc::cli;
  CLI::App app{"ACVC corruption and training tool"};
  app.require_subcommand(1);
  std::string severity_table;
  app.add_option("--severity-table", severity_table, "Severity table file");

  cli::CorruptArgs corrupt;
  auto* c = app.add_subcommand("corrupt", "Corrupt one image or a directory of images");
  c->add_option("--input", corrupt.input, "Image file or directory")->required();
  c->add_option("--op", corrupt.op, "Corruption kind or pool descriptor")->required();
  c->add_option("--severity", corrupt.severity, "Level 1..5 or 'random'")->capture_default_str();
  c->add_option("--seed", corrupt.seed, "Seed")->capture_default_str();
  c->add_option("--output", corrupt.output, "Output directory")->required();

  cli::GridArgs grid;
  auto* g = app.add_subcommand("grid", "Render clean + severities 1..5 per kind");
  g->add_option("--input", grid.input, "Image file")->required();
  g->add_option("--ops", grid.ops, "Kind list or pool descriptor")->capture_default_str();
  g->add_option("--output", grid.output, "Output image (.png or .jpg)")->required();
  g->add_option("--seed", grid.seed, "Seed")->capture_default_str();

  cli::TrainArgs train;
  auto* t = app.add_subcommand("train", "Train on the synthetic benchmark");
  t->add_option("--config", train.config, "key = value config file")->required();

  cli::EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a model file");
  e->add_option("--model", eval.model, "Model file")->required();
  e->add_option("--data", eval.data, "Directory or builtin:target1 / builtin:target2");
  e->add_option("--benchmark-seed", eval.benchmark_seed, "Seed of the builtin benchmark")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  if (c->parsed()) {
    corrupt.severity_table = severity_table;
    return cli::run_corrupt(corrupt, std::cout, std::cerr);
  }
  if (g->parsed()) {
    grid.severity_table = severity_table;
    return cli::run_grid(grid, std::cout, std::cerr);
  }
  if (t->parsed()) {
    train.severity_table = severity_table;
    return cli::run_train(train, std::cout, std::cerr);
  }
  return cli::run_eval(eval, std::cout, std::cerr);
}
