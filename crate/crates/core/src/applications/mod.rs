//! Instance generators for three screening markets: car dealers, health
//! insurers and employers under an income tax.

pub mod car_sales;
pub mod insurance;
pub mod taxation;

pub use car_sales::{make_car_sales, CarSalesParams, CostTable};
pub use insurance::{cara_transform, cara_value, InsuranceEconomy, InsuranceType, Plan};
pub use taxation::{make_taxation, Technology, TaxationEconomy, TaxationInstance, Worker, SIGN_CONVENTIONS};
