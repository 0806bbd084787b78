fn main() {
    println!("qbl");
}
