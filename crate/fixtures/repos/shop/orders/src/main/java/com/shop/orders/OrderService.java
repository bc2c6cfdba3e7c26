package com.shop.orders;

import java.util.ArrayList;
import java.util.List;

public class OrderService {
    private final List<Order> placed = new ArrayList<>();

    public Order place(String sku, int quantity) {
        Order order = new Order(sku, quantity);
        placed.add(order);
        return order;
    }

    public int totalItems() {
        int total = 0;
        for (Order o : placed) {
            total += o.getQuantity();
        }
        return total;
    }
}
