// Writes the labeled toy shape dataset used for desk-scale experiments.

#include <CLI11.hpp>

#include <cstdio>

#include "avae/synth.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a folder of labeled 32x32 shape images"};
  avae::SynthOptions opt;
  std::string out;
  app.add_option("-o,--out", out, "Output folder")->required();
  app.add_option("-n,--count", opt.count, "Number of images")->check(CLI::PositiveNumber);
  app.add_option("--size", opt.image_size, "Image side")->check(CLI::Range(8, 1024));
  app.add_option("-s,--seed", opt.seed, "Seed");
  CLI11_PARSE(app, argc, argv);
  try {
    avae::write_synth_dataset(out, opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::printf("wrote %zu images to %s\n", opt.count, out.c_str());
  return 0;
}
