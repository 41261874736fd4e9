// Regenerates the bundled scene files from the canonical builders.

#include <iostream>
#include <string>

#include "swerve/scene.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "scenes";
  swerve::save_scene(swerve::make_racetrack_scene(), dir + "/racetrack.scene");
  swerve::save_scene(swerve::make_intersection_scene(), dir + "/intersection.scene");
  std::cout << "wrote " << dir << "/racetrack.scene and " << dir << "/intersection.scene\n";
  return 0;
}
