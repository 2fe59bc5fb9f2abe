pub mod local_fit;
