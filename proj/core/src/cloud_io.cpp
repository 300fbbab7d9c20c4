#include "galign/geom.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace galign {

LabeledCloud load_cloud(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_cloud: cannot open " + path);
  std::string header;
  if (!std::getline(is, header))
    throw std::runtime_error("load_cloud: empty file " + path);
  std::istringstream hs(header);
  std::string tag_domain, domain, tag_classes;
  int num_classes = 0;
  hs >> tag_domain >> domain >> tag_classes >> num_classes;
  if (tag_domain != "#domain" || tag_classes != "#classes" ||
      (domain != "source" && domain != "target") || num_classes <= 0)
    throw std::runtime_error("load_cloud: bad header in " + path + ": " + header);

  LabeledCloud cloud;
  cloud.domain_tag = domain == "source" ? Domain::kSource : Domain::kTarget;
  cloud.num_classes = num_classes;
  std::string line;
  std::size_t line_no = 1;
  bool saw_labeled = false, saw_unlabeled = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw std::runtime_error("load_cloud: bad point at line " + std::to_string(line_no));
    cloud.points.insert(cloud.points.end(), {x, y, z});
    int label;
    if (ls >> label) {
      if (label < 0 || label >= num_classes)
        throw std::runtime_error("load_cloud: label out of range at line " +
                                 std::to_string(line_no));
      cloud.labels.push_back(label);
      saw_labeled = true;
    } else {
      saw_unlabeled = true;
    }
    if (saw_labeled && saw_unlabeled)
      throw std::runtime_error("load_cloud: mixed labeled/unlabeled lines in " + path);
  }
  if (cloud.size() == 0) throw std::runtime_error("load_cloud: no points in " + path);
  return cloud;
}

void save_cloud(const std::string& path, const LabeledCloud& cloud) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("save_cloud: cannot open " + path);
  os << "#domain " << (cloud.domain_tag == Domain::kSource ? "source" : "target")
     << " #classes " << cloud.num_classes << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    os << cloud.points[3 * i] << " " << cloud.points[3 * i + 1] << " "
       << cloud.points[3 * i + 2];
    if (cloud.labeled()) os << " " << cloud.labels[i];
    os << "\n";
  }
  if (!os) throw std::runtime_error("save_cloud: write failed for " + path);
}

}  // namespace galign
