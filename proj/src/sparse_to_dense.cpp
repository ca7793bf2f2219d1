#include "s2d/sparse2dense.hpp"

namespace s2d {

DensifyStages sparse_to_dense_stages(const DepthImage& sparse, const NormalImage& normals, const ColorImage& image,
                                     const CameraIntrinsics& k, const SuperpixelLabels& labels,
                                     const DensifyParams& params, Parallelism par) {
  if (!sparse.same_shape(normals) || !sparse.same_shape(image) || !sparse.same_shape(labels))
    throw InvalidInput("sparse depth, normals, color and labels must share dimensions");
  if (sparse.valid_count() == 0) throw NoSeeds();

  DensifyStages stages;
  stages.labels = labels;
  stages.superpixel_filled = normal_guided_filter(sparse, normals, k, params.filter, labels, par);
  stages.bilateral = params.bilateral_step
                         ? bilateral_depth_filter(stages.superpixel_filled, image, params.bilateral, par)
                         : stages.superpixel_filled;
  stages.dense = normal_guided_filter(stages.bilateral, normals, k, params.filter, par);
  return stages;
}

DensifyStages sparse_to_dense_stages(const DepthImage& sparse, const NormalImage& normals, const ColorImage& image,
                                     const CameraIntrinsics& k, const DensifyParams& params, Parallelism par) {
  if (!sparse.same_shape(image)) throw InvalidInput("sparse depth and color image differ in size");
  if (sparse.valid_count() == 0) throw NoSeeds();
  return sparse_to_dense_stages(sparse, normals, image, k, superpixel_segment(image, params.superpixel), params,
                                par);
}

}  // namespace s2d
