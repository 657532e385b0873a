// Retargets one procedural scene with every operator and prints its comfort features.

#include <cstdio>
#include <cstdlib>

#include "vcasir/vcasir.hpp"

int main(int argc, char** argv) {
  using namespace vcasir;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  Rng rng(seed);
  const StereoPair scene = synthetic_scene(rng, 160, 96);
  const DisparityMap& dmap = *scene.disparity();

  std::printf("%-8s %6s %9s %9s %9s %8s %9s %9s\n", "op", "width", "DR", "A_l", "A_r", "D", "DID_mu", "DID_var");
  auto report = [](const char* name, const StereoPair& p) {
    const FeatureVector f = extract_features(p, &*p.disparity());
    std::printf("%-8s %6d %9.4f %9.3f %9.3f %8.4f %9.4f %9.4f\n", name, p.width(), f.dr, f.bd[0], f.bd[1], f.bd[2],
                f.did[0], f.did[1]);
  };
  report("source", scene);
  for (auto op : {RetargetOperator::Crop, RetargetOperator::Scale, RetargetOperator::Seam, RetargetOperator::Multi}) {
    RetargetSpec spec;
    spec.op = op;
    spec.target_width = 112;
    report(std::string(to_string(op)).c_str(), retarget(scene, dmap, spec));
  }
}
