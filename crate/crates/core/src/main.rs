fn main() {
    println!("qcontrol");
}
