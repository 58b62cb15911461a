// Writes a small self-contained asset set: a procedural head with four
// expression meshes, a morph manifest, a background and a ready config.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "facedepth/png_io.hpp"
#include "facedepth/procedural.hpp"

namespace fs = std::filesystem;
using namespace facedepth;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_demo_assets OUT_DIR\n";
    return 2;
  }
  try {
    const fs::path dir = argv[1];
    fs::create_directories(dir / "expressions");

    const TriMesh head = make_demo_head();
    TriMesh base = head;
    base.morphs.clear();
    write_text(dir / "head.obj", serialize_obj(base));

    std::string manifest = "; expression = mesh with the same vertex order as head.obj\n";
    for (const auto& [name, deltas] : head.morphs) {
      TriMesh target = base;
      for (std::size_t i = 0; i < deltas.size(); ++i) target.vertices[i] += deltas[i];
      const std::string rel = "expressions/" + name + ".obj";
      write_text(dir / rel, serialize_obj(target));
      manifest += name + " = " + rel + "\n";
    }
    write_text(dir / "morphs.ini", manifest);

    write_png_rgb8(dir / "background.png", make_gradient_background(480, 640, {70, 80, 100}, {20, 22, 28}));

    write_text(dir / "config.ini",
               "[assets]\n"
               "mesh = head.obj\n"
               "morphs = morphs.ini\n"
               "background = background.png\n"
               "\n"
               "[camera]\n"
               "focal_length_mm = 60\n"
               "sensor_width_mm = 36\n"
               "width_px = 480\n"
               "height_px = 640\n"
               "near_clip_m = 0.01\n"
               "far_clip_m = 5\n"
               "\n"
               "[sweep]\n"
               "frame_count = 100\n"
               "seed = 42\n"
               "distance_mm = 700 1000\n"
               "yaw_deg = -45 45\n"
               "pitch_deg = -20 20\n"
               "roll_deg = -10 10\n"
               "expressions = neutral angry happy sad scared\n"
               "\n"
               "[depth]\n"
               "scale = 10000\n"
               "\n"
               "[output]\n"
               "dir = out\n"
               "workers = 1\n");
    std::cout << "demo assets written to " << dir.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
