#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace eastlab
{

// Integer points of Z^d. Coordinates may be negative (vertices outside the
// positive orthant are permanently healthy).
using Vertex = Eigen::VectorXi;

using VertexIndex = std::int64_t;

// The cube {0,...,L}^d with a mixed-radix vertex index, coordinate 0 varying
// fastest. Every predecessor x - e_i of x has a smaller index than x, so an
// ascending index sweep visits vertices in an order compatible with the
// orientation.
class Box
{
public:
    Box(int dim, int side_length);

    int dim() const { return dim_; }
    int side_length() const { return side_length_; }
    VertexIndex size() const { return size_; }
    VertexIndex stride(int axis) const { return strides_[axis]; }

    bool contains(const Vertex& x) const;
    VertexIndex encode(const Vertex& x) const;
    Vertex decode(VertexIndex index) const;

    // Coordinate of vertex `index` along `axis`, without materialising the vertex.
    int coordinate(VertexIndex index, int axis) const
    {
        return static_cast<int>((index / strides_[axis]) % (side_length_ + 1));
    }

    // Index of index - e_axis, or -1 when that step leaves the box.
    VertexIndex predecessor(VertexIndex index, int axis) const
    {
        return coordinate(index, axis) > 0 ? index - strides_[axis] : -1;
    }

    // Index of index + e_axis, or -1 when that step leaves the box.
    VertexIndex successor(VertexIndex index, int axis) const
    {
        return coordinate(index, axis) < side_length_ ? index + strides_[axis] : -1;
    }

    Vertex origin() const { return Vertex::Zero(dim_); }
    Vertex far_corner() const { return Vertex::Constant(dim_, side_length_); }

private:
    int dim_;
    int side_length_;
    VertexIndex size_;
    std::vector<VertexIndex> strides_;
};

// A positively oriented nearest-neighbour edge: head = tail + e_axis.
struct OrientedEdge
{
    Vertex tail;
    Vertex head;

    int axis() const;
};

OrientedEdge make_edge(const Vertex& tail, int axis);

Vertex unit_vector(int dim, int axis);
Vertex diagonal(int dim, int scale = 1);

// {x - e_i : i in [d]}, including members with a negative coordinate.
std::vector<Vertex> update_neighborhood(const Vertex& x);

// Coordinatewise order x_i <= y_i. Throws std::invalid_argument on a dimension mismatch.
bool precedes(const Vertex& x, const Vertex& y);

// H_k intersected with the box, in ascending index order. Empty for k outside [0, dL].
std::vector<Vertex> hyperplane_in_box(int k, const Box& box);

int l1_norm(const Vertex& x);
int sup_norm(const Vertex& x);

} // namespace eastlab
