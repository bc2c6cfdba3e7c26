package com.shop.orders;

public class Order {
    private final String sku;
    private int quantity;

    public Order(String sku, int quantity) {
        this.sku = sku;
        this.quantity = quantity;
    }

    public String getSku() {
        return sku;
    }

    public int getQuantity() {
        return quantity;
    }
}
