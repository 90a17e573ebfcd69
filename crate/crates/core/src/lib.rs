//! Exact computation of RO(G)-graded homotopy groups of the Eilenberg–MacLane spectrum of the
//! constant Mackey functor Z for small finite groups, by splitting into p-local pieces.

pub mod abelian;
pub mod burnside;
pub mod cellhom;
pub mod families;
pub mod group;
pub mod intmat;
pub mod mackey;
pub mod presentations;
pub mod primes;
pub mod reps;
pub mod splitter;
pub mod suite;
