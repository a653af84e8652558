package com.shop;

import java.util.List;

public class Order {
    private Customer customer;
    private List<Item> items;
    double total;

    public Order(Customer customer, List<Item> items) {
        this.customer = customer;
        this.items = items;
    }

    public double getTotal() {
        return total;
    }
}
