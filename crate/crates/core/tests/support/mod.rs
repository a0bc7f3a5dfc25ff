#![allow(dead_code)]

pub mod gen;
pub mod kleene;
pub mod stores;
pub mod typing;
